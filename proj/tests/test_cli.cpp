#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "orientkit/commands.hpp"
#include "orientkit/errors.hpp"

using namespace orientkit;
namespace fs = std::filesystem;
using io::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("orientkit_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<json> read_lines(const fs::path& p) {
    std::vector<json> out;
    std::ifstream in(p);
    for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
    return out;
}

/// Runs the orientkit binary, returns its exit status and captures stderr.
int run_bin(const std::string& args, std::string* err = nullptr) {
    const fs::path err_file = fs::temp_directory_path() / ("orientkit_cli_err_" + std::to_string(::getpid()));
    const std::string cmd = std::string(ORIENTKIT_BIN) + " " + args + " >/dev/null 2>" + err_file.string();
    const int status = std::system(cmd.c_str());
    if (err) *err = read_file(err_file);
    fs::remove(err_file);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run(const std::function<void(std::ostream&)>& fn, std::string* out = nullptr, std::string* err = nullptr) {
    std::ostringstream o, e;
    const int code = cli::run_command([&] { fn(o); }, e);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return code;
}

AssetAnnotation ann(const std::string& id, const std::string& cat, int alpha) {
    AssetAnnotation a;
    a.asset_id = id;
    a.category = cat;
    a.params = {0.0, alpha, 0.5};
    a.n_views = 64;
    return a;
}

void write_annotations(const fs::path& p, const std::vector<AssetAnnotation>& v) {
    std::vector<json> lines;
    for (const auto& a : v) lines.push_back(io::to_json(a));
    io::write_jsonl(p, lines);
}

cli::SimulateOptions zero_noise_corpus(const fs::path& out) {
    cli::SimulateOptions opt;
    opt.out_dir = out;
    opt.corpus.n_assets = 100;
    opt.corpus.noise.seed = 7;
    opt.corpus.noise.kappa = INFINITY;
    opt.corpus.noise.outlier_fraction = 0.0;
    return opt;
}

}  // namespace

TEST_CASE("simulate writes a deterministic corpus") {
    TempDir dir;
    REQUIRE(run_bin("simulate --assets 100 --seed 7 --out " + (dir.path / "a").string()) == 0);
    REQUIRE(run_bin("simulate --assets 100 --seed 7 --out " + (dir.path / "b").string()) == 0);
    std::set<std::string> ids;
    for (const auto& j : read_lines(dir.path / "a" / "pseudo_labels.jsonl")) ids.insert(j.at("asset_id"));
    CHECK(ids.size() == 100);
    CHECK(read_lines(dir.path / "a" / "ground_truth.jsonl").size() == 100);
    for (const char* f : {"pseudo_labels.jsonl", "ground_truth.jsonl"}) {
        CHECK(read_file(dir.path / "a" / f) == read_file(dir.path / "b" / f));
    }
}

TEST_CASE("invalid arguments exit 2") {
    TempDir dir;
    std::string err;
    CHECK(run_bin("simulate --assets 0 --out " + dir.path.string(), &err) == 2);
    CHECK(err.find("n_assets") != std::string::npos);
    CHECK(run_bin("frobnicate") == 2);
    CHECK(run_bin("annotate --input") == 2);
    CHECK(run_bin("eval --predictions a --ground-truth b --out c --kind absolute") == 2);
}

TEST_CASE("annotate recovers every class on a zero-noise corpus, for any worker count") {
    TempDir dir;
    REQUIRE(run([&](std::ostream& o) { cli::cmd_simulate(zero_noise_corpus(dir.path), o); }) == 0);
    cli::AnnotateOptions opt;
    opt.input = dir.path / "pseudo_labels.jsonl";
    opt.out = dir.path / "ann1.jsonl";
    opt.workers = 1;
    REQUIRE(run([&](std::ostream& o) { cli::cmd_annotate(opt, o); }) == 0);
    opt.out = dir.path / "ann8.jsonl";
    opt.workers = 8;
    REQUIRE(run([&](std::ostream& o) { cli::cmd_annotate(opt, o); }) == 0);
    CHECK(read_file(dir.path / "ann1.jsonl") == read_file(dir.path / "ann8.jsonl"));

    std::map<std::string, int> truth;
    for (const auto& j : read_lines(dir.path / "ground_truth.jsonl")) truth[j.at("asset_id")] = j.at("alpha");
    const auto anns = read_lines(dir.path / "ann1.jsonl");
    REQUIRE(anns.size() == truth.size());
    std::string prev;
    int mismatches = 0;
    for (const auto& a : anns) {
        const std::string id = a.at("asset_id");
        CHECK(id > prev);
        prev = id;
        if (a.at("alpha").get<int>() != truth.at(id)) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("annotate rejects empty and malformed input") {
    TempDir dir;
    std::ofstream(dir.path / "empty.jsonl").close();
    std::string err;
    CHECK(run_bin("annotate --input " + (dir.path / "empty.jsonl").string() + " --out " +
                  (dir.path / "o.jsonl").string(), &err) == 2);
    CHECK(err.find("no pseudo-label records") != std::string::npos);

    PseudoLabelRecord r{"a", "c", "v0", 10.0, {20.0, 90.0, 0.0}, 1.0};
    std::ofstream(dir.path / "bad.jsonl") << io::to_json(r).dump() << "\n" << io::to_json(r).dump() << "\n{oops\n";
    CHECK(run_bin("annotate --input " + (dir.path / "bad.jsonl").string() + " --out " +
                  (dir.path / "o.jsonl").string(), &err) == 2);
    CHECK(err.find("line 3") != std::string::npos);
    CHECK(run_bin("annotate --input " + (dir.path / "missing.jsonl").string() + " --out " +
                  (dir.path / "o.jsonl").string()) == 2);
}

TEST_CASE("assets below min_views are discarded with a reason") {
    TempDir dir;
    std::vector<json> lines;
    for (int v = 0; v < 3; ++v) lines.push_back(io::to_json(PseudoLabelRecord{"few", "c", "v" + std::to_string(v),
                                                                             10.0 * v, {5.0, 90.0, 0.0}, 1.0}));
    io::write_jsonl(dir.path / "p.jsonl", lines);
    cli::AnnotateOptions opt;
    opt.input = dir.path / "p.jsonl";
    opt.out = dir.path / "a.jsonl";
    REQUIRE(run([&](std::ostream& o) { cli::cmd_annotate(opt, o); }) == 0);
    const auto out = read_lines(opt.out);
    REQUIRE(out.size() == 1);
    CHECK(out[0].at("status") == "discarded");
    CHECK(out[0].contains("reason"));
}

TEST_CASE("calibrate prints the flag rate and applies decisions") {
    TempDir dir;
    write_annotations(dir.path / "ok.jsonl", {ann("a", "x", 1), ann("b", "x", 1), ann("c", "y", 2)});
    cli::CalibrateOptions opt;
    opt.annotations = dir.path / "ok.jsonl";
    opt.out_dir = dir.path / "ok";
    std::string out;
    REQUIRE(run([&](std::ostream& o) { cli::cmd_calibrate(opt, o); }, &out) == 0);
    CHECK(out == "categories: 2, inconsistent: 0, flag rate: 0.000000\n");
    CHECK(read_lines(dir.path / "ok" / "category_reports.jsonl").size() == 2);

    write_annotations(dir.path / "mixed.jsonl",
                      {ann("a", "x", 1), ann("b", "x", 2), ann("c", "x", 1), ann("d", "y", 4), ann("e", "y", 0)});
    CalibrationDecision fix;
    fix.category = "x";
    fix.asset_id = "b";
    fix.action = DecisionAction::override_params;
    fix.alpha = 1;
    fix.phi_deg = 0.0;
    fix.reviewer = "r";
    fix.timestamp = "2026-01-01T00:00:00Z";
    CalibrationDecision drop = fix;
    drop.category = "y";
    drop.asset_id = "e";
    drop.action = DecisionAction::discard;
    io::write_jsonl(dir.path / "decisions.jsonl", {io::to_json(fix), io::to_json(drop)});
    opt.annotations = dir.path / "mixed.jsonl";
    opt.decisions = dir.path / "decisions.jsonl";
    opt.out_dir = dir.path / "mixed";
    REQUIRE(run([&](std::ostream& o) { cli::cmd_calibrate(opt, o); }, &out) == 0);
    CHECK(out ==
          "categories: 2, inconsistent: 2, flag rate: 1.000000\n"
          "after decisions: categories: 2, inconsistent: 0, flag rate: 0.000000\n");
    for (const auto& r : read_lines(dir.path / "mixed" / "category_reports.jsonl")) CHECK(r.at("consistent") == true);
    const auto calibrated = read_lines(dir.path / "mixed" / "calibrated_annotations.jsonl");
    REQUIRE(calibrated.size() == 5);
    CHECK(calibrated[1].at("status") == "human_overridden");
    CHECK(calibrated[4].at("status") == "discarded");
}

TEST_CASE("calibrate lists unknown decision targets") {
    TempDir dir;
    write_annotations(dir.path / "a.jsonl", {ann("a", "x", 1)});
    CalibrationDecision d;
    d.category = "x";
    d.asset_id = "ghost";
    d.reviewer = "r";
    d.timestamp = "2026-01-01T00:00:00Z";
    io::write_jsonl(dir.path / "d.jsonl", {io::to_json(d)});
    std::string err;
    CHECK(run_bin("calibrate --annotations " + (dir.path / "a.jsonl").string() + " --decisions " +
                  (dir.path / "d.jsonl").string() + " --out " + (dir.path / "o").string(), &err) == 2);
    CHECK(err.find("x/ghost") != std::string::npos);
}

TEST_CASE("eval scores perfect predictions and rejects misaligned ids") {
    TempDir dir;
    cli::SimulateEvalOptions sim;
    sim.out_dir = dir.path;
    sim.samples = 200;
    sim.predictor = "perfect";
    REQUIRE(run([&](std::ostream& o) { cli::cmd_simulate_eval(sim, o); }) == 0);

    cli::EvalOptions opt;
    opt.predictions = dir.path / "predictions.jsonl";
    opt.ground_truth = dir.path / "eval_ground_truth.jsonl";
    opt.out = dir.path / "report.json";
    REQUIRE(run([&](std::ostream& o) { cli::cmd_eval(opt, o); }) == 0);
    const json report = json::parse(read_file(opt.out));
    CHECK(report.at("n") == 200);
    CHECK(report.at("median_deg") == 0.0);
    CHECK(report.at("acc30") == 1.0);
    CHECK(report.at("acc15") == 1.0);
    CHECK(report.at("acc_8bin") == 1.0);
    CHECK(report.at("symmetry_acc") == 1.0);
    CHECK(report.at("per_sample").size() == 200);

    opt.kind = "relative";
    opt.predictions = dir.path / "relative_predictions.jsonl";
    opt.ground_truth = dir.path / "relative_ground_truth.jsonl";
    opt.out = dir.path / "relative.json";
    REQUIRE(run([&](std::ostream& o) { cli::cmd_eval(opt, o); }) == 0);
    CHECK(json::parse(read_file(opt.out)).at("median_deg") == 0.0);

    auto preds = read_lines(dir.path / "predictions.jsonl");
    preds[3]["sample_id"] = "stray";
    preds.pop_back();
    io::write_jsonl(dir.path / "short.jsonl", preds);
    const std::string truth_id = read_lines(dir.path / "eval_ground_truth.jsonl")[3].at("sample_id");
    std::string err;
    CHECK(run_bin("eval --predictions " + (dir.path / "short.jsonl").string() + " --ground-truth " +
                  (dir.path / "eval_ground_truth.jsonl").string() + " --out " + (dir.path / "x.json").string(),
                  &err) == 2);
    CHECK(err.find("stray") != std::string::npos);
    CHECK(err.find(truth_id) != std::string::npos);
}

TEST_CASE("unwritable output exits 2") {
    TempDir dir;
    std::ofstream(dir.path / "file") << "x";
    std::string err;
    CHECK(run_bin("simulate --assets 5 --out " + (dir.path / "file" / "sub").string(), &err) == 2);
    CHECK(err.find("error:") != std::string::npos);
}

TEST_CASE("a config file supplies defaults that flags override") {
    TempDir dir;
    std::ofstream(dir.path / "cfg.json") << R"({"noise": {"kappa": 50.0, "seed": 3}, "log_level": "warn"})";
    REQUIRE(run_bin("--config " + (dir.path / "cfg.json").string() + " simulate --assets 10 --out " +
                    (dir.path / "a").string()) == 0);
    REQUIRE(run_bin("--config " + (dir.path / "cfg.json").string() + " simulate --assets 10 --seed 3 --out " +
                    (dir.path / "b").string()) == 0);
    REQUIRE(run_bin("--config " + (dir.path / "cfg.json").string() + " simulate --assets 10 --seed 4 --out " +
                    (dir.path / "c").string()) == 0);
    CHECK(read_file(dir.path / "a" / "pseudo_labels.jsonl") == read_file(dir.path / "b" / "pseudo_labels.jsonl"));
    CHECK(read_file(dir.path / "a" / "pseudo_labels.jsonl") != read_file(dir.path / "c" / "pseudo_labels.jsonl"));
    std::ofstream(dir.path / "bad.json") << "{";
    CHECK(run_bin("--config " + (dir.path / "bad.json").string() + " simulate --out " + dir.path.string()) == 2);
}

TEST_CASE("serve exits 2 when the port is taken") {
    TempDir dir;
    write_annotations(dir.path / "a.jsonl", {ann("a", "x", 1)});
    const int sock = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(sock >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(sock, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    REQUIRE(::listen(sock, 1) == 0);
    socklen_t len = sizeof(addr);
    REQUIRE(::getsockname(sock, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
    const int port = ntohs(addr.sin_port);
    std::string err;
    CHECK(run_bin("serve --annotations " + (dir.path / "a.jsonl").string() + " --port " + std::to_string(port), &err) ==
          2);
    CHECK(err.find("cannot bind") != std::string::npos);
    ::close(sock);
    CHECK(run_bin("serve --annotations " + (dir.path / "missing.jsonl").string()) == 2);
}
