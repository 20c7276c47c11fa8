#include "orientkit/commands.hpp"

#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "orientkit/errors.hpp"

namespace orientkit::cli {

namespace {

const std::map<int, double> kUniformClassMix{{0, 0.25}, {1, 0.25}, {2, 0.25}, {4, 0.25}};

template <typename T>
void log_warnings(const io::ReadResult<T>& r, const std::filesystem::path& path) {
    for (const auto& w : r.warnings) spdlog::warn("{}: {}", path.string(), w);
}

template <typename Line>
std::map<std::string, std::size_t> index_by_id(const std::vector<Line>& lines, const std::filesystem::path& path) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!idx.emplace(lines[i].sample_id, i).second) {
            throw ValidationError(fmt::format("{}: duplicate sample_id '{}'", path.string(), lines[i].sample_id));
        }
    }
    return idx;
}

// Pairs predictions with ground truth by sample id, in ground-truth order.
template <typename Pred, typename Truth>
std::vector<std::pair<const Pred*, const Truth*>> align(const std::vector<Pred>& preds,
                                                        const std::vector<Truth>& truths, const EvalOptions& opt) {
    const auto pidx = index_by_id(preds, opt.predictions);
    const auto tidx = index_by_id(truths, opt.ground_truth);
    std::vector<std::string> unmatched;
    for (const auto& t : truths) {
        if (!pidx.contains(t.sample_id)) unmatched.push_back(t.sample_id);
    }
    for (const auto& p : preds) {
        if (!tidx.contains(p.sample_id)) unmatched.push_back(p.sample_id);
    }
    if (!unmatched.empty()) {
        std::sort(unmatched.begin(), unmatched.end());
        throw ValidationError(fmt::format("{} sample ids do not match between predictions and ground truth: {}",
                                          unmatched.size(), fmt::join(unmatched, ", ")));
    }
    std::vector<std::pair<const Pred*, const Truth*>> pairs;
    pairs.reserve(truths.size());
    for (const auto& t : truths) pairs.emplace_back(&preds[pidx.at(t.sample_id)], &t);
    return pairs;
}

void print_summary(std::ostream& out, const char* label, const CalibrationSummary& s) {
    out << fmt::format("{}categories: {}, inconsistent: {}, flag rate: {:.6f}\n", label, s.total_categories,
                       s.inconsistent_categories, s.flag_rate);
}

}  // namespace

void cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
    const Corpus corpus = gen_corpus(opt.corpus, opt.workers);
    std::vector<io::json> labels, truths;
    labels.reserve(corpus.records.size());
    for (const auto& r : corpus.records) labels.push_back(io::to_json(r));
    for (const auto& t : corpus.truths) truths.push_back(io::to_json(t));
    io::write_jsonl(opt.out_dir / "pseudo_labels.jsonl", labels);
    io::write_jsonl(opt.out_dir / "ground_truth.jsonl", truths);
    spdlog::info("simulated {} assets, {} views", corpus.truths.size(), corpus.records.size());
    out << fmt::format("wrote {} pseudo-labels for {} assets to {}\n", corpus.records.size(), corpus.truths.size(),
                       opt.out_dir.string());
}

void cmd_simulate_eval(const SimulateEvalOptions& opt, std::ostream& out) {
    NoiseConfig noise = opt.noise;
    if (opt.predictor == "perfect") {
        noise.kappa = std::numeric_limits<double>::infinity();
        noise.outlier_fraction = 0.0;
    } else if (opt.predictor != "noisy" && opt.predictor != "random") {
        throw ValidationError("predictor must be perfect, noisy or random");
    }
    EvalDataset ds = gen_eval_dataset(opt.samples, kUniformClassMix, noise);
    if (opt.predictor == "random") randomize_symmetry(ds.orientation, CounterRng(noise.seed).substream(0x5EED).key());

    std::vector<io::json> preds, gts, rel_preds, rel_gts;
    for (const auto& s : ds.orientation) {
        preds.push_back(io::prediction_to_json(s.sample_id, s.predicted));
        gts.push_back(io::ground_truth_to_json(s.sample_id, s.ground_truth, s.gt_alpha));
    }
    for (const auto& r : ds.relative) {
        rel_preds.push_back(io::rotation_to_json(r.sample_id, r.predicted_relative));
        rel_gts.push_back(io::rotation_to_json(r.sample_id, r.ground_truth_relative));
    }
    io::write_jsonl(opt.out_dir / "predictions.jsonl", preds);
    io::write_jsonl(opt.out_dir / "eval_ground_truth.jsonl", gts);
    io::write_jsonl(opt.out_dir / "relative_predictions.jsonl", rel_preds);
    io::write_jsonl(opt.out_dir / "relative_ground_truth.jsonl", rel_gts);
    out << fmt::format("wrote {} samples and {} relative pairs to {}\n", ds.orientation.size(), ds.relative.size(),
                       opt.out_dir.string());
}

void cmd_annotate(const AnnotateOptions& opt, std::ostream& out) {
    validate(opt.annotator);
    const auto in = io::read_pseudo_labels(opt.input);
    log_warnings(in, opt.input);
    if (in.items.empty()) throw ValidationError(opt.input.string() + ": no pseudo-label records");
    const auto annotations = annotate_corpus(in.items, opt.annotator, opt.workers);
    std::vector<io::json> lines;
    std::size_t discarded = 0;
    for (const auto& a : annotations) {
        if (a.status == AnnotationStatus::discarded) ++discarded;
        lines.push_back(io::to_json(a));
    }
    io::write_jsonl(opt.out, lines);
    out << fmt::format("annotated {} assets ({} discarded) from {} records\n", annotations.size(), discarded,
                       in.items.size());
}

void cmd_calibrate(const CalibrateOptions& opt, std::ostream& out) {
    const auto in = io::read_annotations(opt.annotations);
    log_warnings(in, opt.annotations);
    if (in.items.empty()) throw ValidationError(opt.annotations.string() + ": no annotations");
    std::vector<AssetAnnotation> annotations = in.items;
    std::vector<CategoryReport> reports = check_all_categories(annotations, opt.workers);
    print_summary(out, "", summarize(reports));

    if (opt.decisions) {
        const auto dec = io::read_decisions(*opt.decisions);
        log_warnings(dec, *opt.decisions);
        std::vector<AssetAnnotation> calibrated = apply_decisions(annotations, dec.items);
        reports = check_all_categories(calibrated, opt.workers);
        print_summary(out, "after decisions: ", summarize(reports));
        std::vector<io::json> lines;
        for (const auto& a : calibrated) lines.push_back(io::to_json(a));
        io::write_jsonl(opt.out_dir / "calibrated_annotations.jsonl", lines);
    }
    std::vector<io::json> lines;
    for (const auto& r : reports) lines.push_back(io::to_json(r));
    io::write_jsonl(opt.out_dir / "category_reports.jsonl", lines);
}

void cmd_eval(const EvalOptions& opt, std::ostream& out) {
    EvalReport report;
    if (opt.kind == "orientation") {
        const auto preds = io::read_predictions(opt.predictions);
        const auto truths = io::read_ground_truths(opt.ground_truth);
        log_warnings(preds, opt.predictions);
        log_warnings(truths, opt.ground_truth);
        if (truths.items.empty()) throw ValidationError(opt.ground_truth.string() + ": no samples");
        std::vector<OrientationEvalSample> samples;
        for (const auto& [p, t] : align(preds.items, truths.items, opt)) {
            samples.push_back({t->sample_id, p->predicted, t->truth, t->alpha});
        }
        report = evaluate_orientation(samples, opt.mode);
    } else if (opt.kind == "relative") {
        const auto preds = io::read_rotations(opt.predictions);
        const auto truths = io::read_rotations(opt.ground_truth);
        log_warnings(preds, opt.predictions);
        log_warnings(truths, opt.ground_truth);
        if (truths.items.empty()) throw ValidationError(opt.ground_truth.string() + ": no samples");
        std::vector<RotationEvalSample> samples;
        for (const auto& [p, t] : align(preds.items, truths.items, opt)) {
            samples.push_back({t->sample_id, p->rotation, t->rotation});
        }
        report = evaluate_relative_rotation(samples);
    } else {
        throw ValidationError("kind must be orientation or relative");
    }
    io::write_json(opt.out, io::to_json(report));
    out << fmt::format("n={} med={:.6f} acc30={:.6f} acc15={:.6f}", report.n, report.median_deg, report.acc30,
                       report.acc15);
    if (report.acc_8bin) out << fmt::format(" acc_8bin={:.6f}", *report.acc_8bin);
    if (report.symmetry_acc) out << fmt::format(" symmetry_acc={:.6f}", *report.symmetry_acc);
    out << '\n';
}

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const UnknownTargetError*>(&e) || dynamic_cast<const InsufficientDataError*>(&e) ||
        dynamic_cast<const IoError*>(&e)) {
        return kExitUsage;
    }
    return kExitRuntime;
}

int run_command(const std::function<void()>& fn, std::ostream& err) {
    try {
        fn();
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace orientkit::cli
