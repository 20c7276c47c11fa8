#include <csignal>
#include <cstdlib>
#include <iostream>

#include "orientkit/commands.hpp"
#include "orientkit/errors.hpp"
#include "orientkit/review_service.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

using namespace orientkit;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

void setup_logging(const std::string& level_name) {
    auto logger = spdlog::stderr_color_mt("orientkit");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%Y-%m-%d %H:%M:%S.%e] [%^%l%$] %v");
    const auto level = spdlog::level::from_str(level_name);
    if (level == spdlog::level::off && level_name != "off") {
        throw ValidationError("unknown log level '" + level_name + "'");
    }
    spdlog::set_level(level);
}

int serve(const io::RunConfig& cfg, const std::filesystem::path& annotations,
          const std::optional<std::filesystem::path>& reports, const std::optional<std::filesystem::path>& labels,
          const std::optional<std::filesystem::path>& decisions, const std::optional<std::filesystem::path>& ui_dir,
          const std::string& host, int port) {
    std::unique_ptr<review::ReviewState> state;
    const int rc = cli::run_command(
        [&] {
            auto anns = io::read_annotations(annotations);
            for (const auto& w : anns.warnings) spdlog::warn("{}: {}", annotations.string(), w);
            std::optional<std::vector<CategoryReport>> reps;
            if (reports) reps = io::read_category_reports(*reports).items;
            std::vector<PseudoLabelRecord> views;
            if (labels) views = io::read_pseudo_labels(*labels).items;
            state = std::make_unique<review::ReviewState>(std::move(anns.items), std::move(reps), std::move(views),
                                                          decisions, cfg.annotator);
        },
        std::cerr);
    if (rc != cli::kExitOk) return rc;

    httplib::Server server;
    review::register_routes(server, *state, ui_dir);
    if (!server.bind_to_port(host, port)) {
        std::cerr << "error: cannot bind " << host << ":" << port << " (port in use?)\n";
        return cli::kExitUsage;
    }
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    spdlog::info("review service listening on http://{}:{}", host, port);
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    const bool ok = server.listen_after_bind();
    g_server = nullptr;
    return ok ? cli::kExitOk : cli::kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Orientation and symmetry annotation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string log_level;
    std::size_t workers = 0;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off (default: ORIENTKIT_LOG or info)");

    cli::SimulateOptions sim;
    double sim_kappa = 20.0, sim_outliers = 0.0;
    auto* simulate = app.add_subcommand("simulate", "Generate a simulated pseudo-label corpus");
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();
    simulate->add_option("--assets", sim.corpus.n_assets, "Number of assets")->capture_default_str();
    simulate->add_option("--categories", sim.corpus.n_categories, "Number of categories (0: assets / 10)");
    simulate->add_option("--views", sim.corpus.n_views, "Views per asset")->capture_default_str();
    auto* sim_seed_opt = simulate->add_option("--seed", sim.corpus.seed, "Random seed (default: config or 0)");
    auto* kappa_opt = simulate->add_option("--kappa", sim_kappa, "von Mises concentration of azimuth noise");
    auto* outlier_opt = simulate->add_option("--outliers", sim_outliers, "Outlier fraction per view");
    simulate->add_option("--corrupt-fraction", sim.corpus.corrupt_fraction, "Fraction of assets with a wrong class");
    simulate->add_option("--workers", workers, "Worker threads");

    cli::SimulateEvalOptions simeval;
    double eval_kappa = 20.0, eval_outliers = 0.0;
    auto* simulate_eval = app.add_subcommand("simulate-eval", "Generate a simulated evaluation set");
    simulate_eval->add_option("--out", simeval.out_dir, "Output directory")->required();
    simulate_eval->add_option("--samples", simeval.samples, "Number of samples")->capture_default_str();
    auto* eval_seed_opt = simulate_eval->add_option("--seed", simeval.noise.seed, "Random seed (default: config or 0)");
    simulate_eval->add_option("--predictor", simeval.predictor, "perfect, noisy or random")
        ->check(CLI::IsMember({"perfect", "noisy", "random"}))
        ->capture_default_str();
    auto* eval_kappa_opt = simulate_eval->add_option("--kappa", eval_kappa, "von Mises concentration of noise");
    auto* eval_outlier_opt = simulate_eval->add_option("--outliers", eval_outliers, "Outlier fraction");

    cli::AnnotateOptions ann;
    auto* annotate = app.add_subcommand("annotate", "Fit orientation and symmetry per asset");
    annotate->add_option("--input", ann.input, "pseudo_labels.jsonl")->required();
    annotate->add_option("--out", ann.out, "annotations.jsonl to write")->required();
    annotate->add_option("--workers", workers, "Worker threads");

    cli::CalibrateOptions cal;
    std::string decisions_path;
    auto* calibrate = app.add_subcommand("calibrate", "Check per-category symmetry consistency");
    calibrate->add_option("--annotations", cal.annotations, "annotations.jsonl")->required();
    calibrate->add_option("--decisions", decisions_path, "decisions.jsonl to apply");
    calibrate->add_option("--out", cal.out_dir, "Output directory")->required();
    calibrate->add_option("--workers", workers, "Worker threads");

    cli::EvalOptions ev;
    std::string mode = "camera_facing";
    auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    eval->add_option("--predictions", ev.predictions, "Predictions JSONL")->required();
    eval->add_option("--ground-truth", ev.ground_truth, "Ground-truth JSONL")->required();
    eval->add_option("--out", ev.out, "report.json to write")->required();
    eval->add_option("--kind", ev.kind, "orientation or relative")
        ->check(CLI::IsMember({"orientation", "relative"}))
        ->capture_default_str();
    eval->add_option("--mode", mode, "camera_facing or min_error")
        ->check(CLI::IsMember({"camera_facing", "min_error"}))
        ->capture_default_str();

    std::string serve_annotations, serve_reports, serve_labels, serve_decisions, serve_ui;
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP review service");
    serve_cmd->add_option("--annotations", serve_annotations, "annotations.jsonl")->required();
    serve_cmd->add_option("--reports", serve_reports, "category_reports.jsonl (recomputed when omitted)");
    serve_cmd->add_option("--pseudo-labels", serve_labels, "pseudo_labels.jsonl for histogram plots");
    serve_cmd->add_option("--decisions", serve_decisions, "Decision log to replay and append to");
    serve_cmd->add_option("--ui-dir", serve_ui, "Static UI bundle served at /");
    serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(1, 65535))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? cli::kExitOk : cli::kExitUsage;
    }

    io::RunConfig cfg;
    const int setup = cli::run_command(
        [&] {
            if (!config_path.empty()) cfg = io::load_run_config(config_path);
            if (log_level.empty()) {
                const char* env = std::getenv("ORIENTKIT_LOG");
                log_level = env && *env ? env : cfg.log_level;
            }
            setup_logging(log_level);
            if (workers == 0) workers = cfg.workers;
        },
        std::cerr);
    if (setup != cli::kExitOk) return setup;

    if (*simulate) {
        sim.corpus.noise = cfg.noise;
        if (kappa_opt->count()) sim.corpus.noise.kappa = sim_kappa;
        if (outlier_opt->count()) sim.corpus.noise.outlier_fraction = sim_outliers;
        if (!sim_seed_opt->count()) sim.corpus.seed = cfg.noise.seed;
        sim.corpus.noise.seed = sim.corpus.seed;
        sim.workers = workers;
        return cli::run_command([&] { cli::cmd_simulate(sim, std::cout); }, std::cerr);
    }
    if (*simulate_eval) {
        const std::uint64_t seed = eval_seed_opt->count() ? simeval.noise.seed : cfg.noise.seed;
        simeval.noise = cfg.noise;
        simeval.noise.seed = seed;
        if (eval_kappa_opt->count()) simeval.noise.kappa = eval_kappa;
        if (eval_outlier_opt->count()) simeval.noise.outlier_fraction = eval_outliers;
        return cli::run_command([&] { cli::cmd_simulate_eval(simeval, std::cout); }, std::cerr);
    }
    if (*annotate) {
        ann.annotator = cfg.annotator;
        ann.workers = workers;
        return cli::run_command([&] { cli::cmd_annotate(ann, std::cout); }, std::cerr);
    }
    if (*calibrate) {
        if (!decisions_path.empty()) cal.decisions = decisions_path;
        cal.workers = workers;
        return cli::run_command([&] { cli::cmd_calibrate(cal, std::cout); }, std::cerr);
    }
    if (*eval) {
        ev.mode = parse_candidate_mode(mode);
        return cli::run_command([&] { cli::cmd_eval(ev, std::cout); }, std::cerr);
    }
    auto opt_path = [](const std::string& s) -> std::optional<std::filesystem::path> {
        if (s.empty()) return std::nullopt;
        return std::filesystem::path(s);
    };
    return serve(cfg, serve_annotations, opt_path(serve_reports), opt_path(serve_labels), opt_path(serve_decisions),
                 opt_path(serve_ui), host, port);
}
