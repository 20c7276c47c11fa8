#include "orientkit/io.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "orientkit/angles.hpp"
#include "orientkit/errors.hpp"

namespace orientkit::io {

namespace {

// Field access with type checks; remembers which keys were consumed so that
// the rest can be reported as unknown.
class Fields {
public:
    explicit Fields(const json& j) : j_(j) {
        if (!j.is_object()) throw FormatError("expected a JSON object", 0);
        const json& v = require("schema_version");
        if (!v.is_number_integer()) throw FormatError("schema_version must be an integer", 0);
        if (v.get<int>() != kSchemaVersion) {
            throw FormatError("unsupported schema_version " + v.dump(), 0);
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    std::string str(const std::string& key) {
        const json& v = require(key);
        if (!v.is_string()) throw FormatError("field '" + key + "' must be a string", 0);
        return v.get<std::string>();
    }

    double num(const std::string& key) {
        const json& v = require(key);
        if (!v.is_number()) throw FormatError("field '" + key + "' must be a number", 0);
        return v.get<double>();
    }

    int integer(const std::string& key) {
        const json& v = require(key);
        if (!v.is_number_integer()) throw FormatError("field '" + key + "' must be an integer", 0);
        return v.get<int>();
    }

    bool boolean(const std::string& key) {
        const json& v = require(key);
        if (!v.is_boolean()) throw FormatError("field '" + key + "' must be a boolean", 0);
        return v.get<bool>();
    }

    const json& raw(const std::string& key) { return require(key); }

    std::optional<double> opt_num(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return num(key);
    }
    std::optional<int> opt_int(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return integer(key);
    }
    std::optional<std::string> opt_str(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return str(key);
    }

    void report_unknown(std::vector<std::string>* warnings) const {
        if (!warnings) return;
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) warnings->push_back("unknown field '" + key + "' ignored");
        }
    }

private:
    const json& require(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw FormatError("missing field '" + key + "'", 0);
        return j_.at(key);
    }

    const json& j_;
    std::set<std::string> seen_{"schema_version"};
};

double q(double deg) { return quantize_angle(deg); }
double q_wrap(double deg, double period = 360.0) { return wrap_deg(quantize_angle(deg), period); }

json header() { return json{{"schema_version", kSchemaVersion}}; }

template <typename T, typename Parse>
ReadResult<T> read_lines(const std::filesystem::path& path, Parse&& parse) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    ReadResult<T> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        std::vector<std::string> warnings;
        try {
            out.items.push_back(parse(j, &warnings));
        } catch (const FormatError& e) {
            throw FormatError(e.what(), line_no);
        } catch (const ValidationError& e) {
            throw FormatError(e.what(), line_no);
        }
        for (auto& w : warnings) out.warnings.push_back("line " + std::to_string(line_no) + ": " + w);
    }
    return out;
}

void write_text_atomically(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out << text;
        out.flush();
        if (!out) throw IoError("failed writing " + path.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot replace " + path.string());
    }
}

}  // namespace

json to_json(const PseudoLabelRecord& r) {
    json j = header();
    j["asset_id"] = r.asset_id;
    j["category"] = r.category;
    j["view_id"] = r.view_id;
    j["camera_azimuth_deg"] = q_wrap(r.camera_azimuth_deg);
    j["pred_azimuth_deg"] = q_wrap(r.predicted.azimuth_deg);
    j["pred_polar_deg"] = q(r.predicted.polar_deg);
    j["pred_inplane_deg"] = q_wrap(r.predicted.inplane_deg);
    j["confidence"] = r.confidence;
    return j;
}

PseudoLabelRecord pseudo_label_from_json(const json& j, std::vector<std::string>* warnings) {
    Fields f(j);
    PseudoLabelRecord r;
    r.asset_id = f.str("asset_id");
    r.category = f.str("category");
    r.view_id = f.str("view_id");
    r.camera_azimuth_deg = f.num("camera_azimuth_deg");
    r.predicted.azimuth_deg = f.num("pred_azimuth_deg");
    r.predicted.polar_deg = f.num("pred_polar_deg");
    r.predicted.inplane_deg = f.num("pred_inplane_deg");
    r.confidence = f.num("confidence");
    f.report_unknown(warnings);
    validate(r);
    return r;
}

json to_json(const AssetAnnotation& a) {
    json j = header();
    j["asset_id"] = a.asset_id;
    j["category"] = a.category;
    j["alpha"] = a.params.alpha;
    j["phi_deg"] = a.params.alpha >= 1 ? q_wrap(a.params.phi_deg, 360.0 / a.params.alpha) : q_wrap(a.params.phi_deg);
    j["sigma"] = a.params.sigma;
    j["residual"] = a.residual;
    j["n_views"] = a.n_views;
    j["status"] = std::string(to_string(a.status));
    if (a.reason) j["reason"] = *a.reason;
    if (a.polar_deg) j["polar_deg"] = std::min(q(*a.polar_deg), 179.999999);
    if (a.inplane_deg) j["inplane_deg"] = q_wrap(*a.inplane_deg);
    return j;
}

AssetAnnotation annotation_from_json(const json& j, std::vector<std::string>* warnings) {
    Fields f(j);
    AssetAnnotation a;
    a.asset_id = f.str("asset_id");
    a.category = f.str("category");
    a.params.alpha = f.integer("alpha");
    a.params.phi_deg = f.num("phi_deg");
    a.params.sigma = f.num("sigma");
    a.residual = f.num("residual");
    a.n_views = f.integer("n_views");
    a.status = parse_status(f.str("status"));
    a.reason = f.opt_str("reason");
    a.polar_deg = f.opt_num("polar_deg");
    a.inplane_deg = f.opt_num("inplane_deg");
    f.report_unknown(warnings);
    validate(a.params);
    if (!is_symmetry_class(a.params.alpha)) throw ValidationError("annotation alpha must be one of {0, 1, 2, 4}");
    return a;
}

json to_json(const CategoryReport& r) {
    json j = header();
    j["category"] = r.category;
    json hist = json::object();
    for (const auto& [alpha, count] : r.alpha_histogram) hist[std::to_string(alpha)] = count;
    j["alpha_histogram"] = hist;
    j["consistent"] = r.consistent;
    j["majority_alpha"] = r.majority_alpha ? json(*r.majority_alpha) : json(nullptr);
    j["flagged_asset_ids"] = r.flagged_asset_ids;
    return j;
}

CategoryReport category_report_from_json(const json& j, std::vector<std::string>* warnings) {
    Fields f(j);
    CategoryReport r;
    r.category = f.str("category");
    const json& hist = f.raw("alpha_histogram");
    if (!hist.is_object()) throw FormatError("alpha_histogram must be an object", 0);
    for (const auto& [key, value] : hist.items()) {
        if (!value.is_number_integer()) throw FormatError("alpha_histogram counts must be integers", 0);
        int alpha = 0;
        try {
            alpha = std::stoi(key);
        } catch (const std::exception&) {
            throw FormatError("alpha_histogram key '" + key + "' is not an integer", 0);
        }
        r.alpha_histogram[alpha] = value.get<int>();
    }
    r.consistent = f.boolean("consistent");
    r.majority_alpha = f.opt_int("majority_alpha");
    const json& flagged = f.raw("flagged_asset_ids");
    if (!flagged.is_array()) throw FormatError("flagged_asset_ids must be an array", 0);
    for (const auto& id : flagged) {
        if (!id.is_string()) throw FormatError("flagged_asset_ids entries must be strings", 0);
        r.flagged_asset_ids.push_back(id.get<std::string>());
    }
    f.report_unknown(warnings);
    return r;
}

json to_json(const CalibrationDecision& d) {
    json j = header();
    j["category"] = d.category;
    j["asset_id"] = d.asset_id;
    j["action"] = std::string(to_string(d.action));
    if (d.alpha) j["alpha"] = *d.alpha;
    if (d.phi_deg) j["phi_deg"] = q(*d.phi_deg);
    j["reviewer"] = d.reviewer;
    j["timestamp"] = d.timestamp;
    return j;
}

CalibrationDecision decision_from_json(const json& j, std::vector<std::string>* warnings) {
    Fields f(j);
    CalibrationDecision d;
    d.category = f.str("category");
    d.asset_id = f.str("asset_id");
    d.action = parse_action(f.str("action"));
    d.alpha = f.opt_int("alpha");
    d.phi_deg = f.opt_num("phi_deg");
    d.reviewer = f.str("reviewer");
    d.timestamp = f.str("timestamp");
    f.report_unknown(warnings);
    validate(d);
    return d;
}

json to_json(const AssetTruth& t) {
    json j = header();
    j["asset_id"] = t.asset_id;
    j["category"] = t.category;
    j["alpha"] = t.alpha;
    j["phi_deg"] = q(t.phi_deg);
    j["corrupted"] = t.corrupted;
    return j;
}

AssetTruth asset_truth_from_json(const json& j, std::vector<std::string>* warnings) {
    Fields f(j);
    AssetTruth t;
    t.asset_id = f.str("asset_id");
    t.category = f.str("category");
    t.alpha = f.integer("alpha");
    t.phi_deg = f.num("phi_deg");
    t.corrupted = f.has("corrupted") ? f.boolean("corrupted") : false;
    f.report_unknown(warnings);
    if (t.asset_id.empty()) throw ValidationError("asset_id must not be empty");
    if (!is_symmetry_class(t.alpha)) throw ValidationError("alpha must be one of {0, 1, 2, 4}");
    return t;
}

json prediction_to_json(const std::string& sample_id, const DecodedOrientation& p) {
    json j = header();
    j["sample_id"] = sample_id;
    j["alpha"] = p.alpha_hat;
    j["azimuth_deg"] = q_wrap(p.azimuth_deg);
    j["polar_deg"] = q(p.polar_deg);
    j["inplane_deg"] = q_wrap(p.inplane_deg);
    return j;
}

json ground_truth_to_json(const std::string& sample_id, const OrientationTriplet& t, std::optional<int> alpha) {
    json j = header();
    j["sample_id"] = sample_id;
    j["azimuth_deg"] = q_wrap(t.azimuth_deg);
    j["polar_deg"] = q(t.polar_deg);
    j["inplane_deg"] = q_wrap(t.inplane_deg);
    if (alpha) j["alpha"] = *alpha;
    return j;
}

json rotation_to_json(const std::string& sample_id, const RotationMatrix& r) {
    json j = header();
    j["sample_id"] = sample_id;
    json m = json::array();
    for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) m.push_back(r(row, col));
    }
    j["rotation"] = m;
    return j;
}

PredictionLine prediction_from_json(const json& j, std::vector<std::string>* warnings) {
    Fields f(j);
    PredictionLine p;
    p.sample_id = f.str("sample_id");
    const int alpha = f.integer("alpha");
    const double az = f.num("azimuth_deg");
    const double pol = f.num("polar_deg");
    const double rot = f.num("inplane_deg");
    f.report_unknown(warnings);
    p.predicted = make_decoded(alpha, az, pol, rot);
    return p;
}

GroundTruthLine ground_truth_from_json(const json& j, std::vector<std::string>* warnings) {
    Fields f(j);
    GroundTruthLine g;
    g.sample_id = f.str("sample_id");
    g.truth = {f.num("azimuth_deg"), f.num("polar_deg"), f.num("inplane_deg")};
    g.alpha = f.opt_int("alpha");
    f.report_unknown(warnings);
    validate(g.truth);
    if (g.alpha && !is_symmetry_class(*g.alpha)) throw ValidationError("alpha must be one of {0, 1, 2, 4}");
    return g;
}

RotationLine rotation_from_json(const json& j, std::vector<std::string>* warnings) {
    Fields f(j);
    RotationLine r;
    r.sample_id = f.str("sample_id");
    const json& m = f.raw("rotation");
    if (!m.is_array() || m.size() != 9) throw FormatError("rotation must be an array of 9 numbers", 0);
    Eigen::Matrix3d mat;
    for (int k = 0; k < 9; ++k) {
        if (!m[static_cast<std::size_t>(k)].is_number()) throw FormatError("rotation entries must be numbers", 0);
        mat(k / 3, k % 3) = m[static_cast<std::size_t>(k)].get<double>();
    }
    f.report_unknown(warnings);
    // 17-digit JSON doubles round-trip exactly; allow a little slack for hand-written files.
    r.rotation = RotationMatrix::from_matrix(mat, 1e-6);
    return r;
}

json to_json(const EvalReport& r) {
    json j = header();
    j["n"] = r.n;
    j["median_deg"] = q(r.median_deg);
    j["acc30"] = r.acc30;
    j["acc15"] = r.acc15;
    if (r.acc_8bin) j["acc_8bin"] = *r.acc_8bin;
    if (r.symmetry_acc) j["symmetry_acc"] = *r.symmetry_acc;
    json per = json::array();
    for (const auto& s : r.per_sample) {
        json e;
        e["sample_id"] = s.sample_id;
        e["error_deg"] = q(s.error_deg);
        if (s.evaluated_azimuth_deg) e["evaluated_azimuth_deg"] = q_wrap(*s.evaluated_azimuth_deg);
        if (s.bin_hit) e["bin_hit"] = *s.bin_hit;
        if (s.symmetry_hit) e["symmetry_hit"] = *s.symmetry_hit;
        if (s.degenerate) e["degenerate"] = true;
        per.push_back(std::move(e));
    }
    j["per_sample"] = per;
    return j;
}

json to_json(const CalibrationSummary& s) {
    json j = header();
    j["total_categories"] = s.total_categories;
    j["inconsistent_categories"] = s.inconsistent_categories;
    j["flag_rate"] = s.flag_rate;
    json dist = json::object();
    for (const auto& [alpha, count] : s.alpha_distribution) dist[std::to_string(alpha)] = count;
    j["alpha_distribution"] = dist;
    return j;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& lines) {
    std::string text;
    for (const auto& l : lines) {
        text += l.dump();
        text += '\n';
    }
    write_text_atomically(path, text);
}

void write_json(const std::filesystem::path& path, const json& doc) { write_text_atomically(path, doc.dump(2) + "\n"); }

void append_jsonl_line(const std::filesystem::path& path, const json& line) {
    const std::string text = line.dump() + "\n";
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) throw IoError("cannot open " + path.string() + " for appending");
    if (::flock(fd, LOCK_EX) != 0) {
        ::close(fd);
        throw IoError("cannot lock " + path.string());
    }
    std::size_t written = 0;
    bool ok = true;
    while (written < text.size()) {
        const ssize_t n = ::write(fd, text.data() + written, text.size() - written);
        if (n <= 0) {
            ok = false;
            break;
        }
        written += static_cast<std::size_t>(n);
    }
    if (ok) ok = ::fsync(fd) == 0;
    ::flock(fd, LOCK_UN);
    ::close(fd);
    if (!ok) throw IoError("failed appending to " + path.string());
}

ReadResult<PseudoLabelRecord> read_pseudo_labels(const std::filesystem::path& path) {
    return read_lines<PseudoLabelRecord>(path, pseudo_label_from_json);
}
ReadResult<AssetAnnotation> read_annotations(const std::filesystem::path& path) {
    return read_lines<AssetAnnotation>(path, annotation_from_json);
}
ReadResult<CategoryReport> read_category_reports(const std::filesystem::path& path) {
    return read_lines<CategoryReport>(path, category_report_from_json);
}
ReadResult<CalibrationDecision> read_decisions(const std::filesystem::path& path) {
    return read_lines<CalibrationDecision>(path, decision_from_json);
}
ReadResult<AssetTruth> read_asset_truths(const std::filesystem::path& path) {
    return read_lines<AssetTruth>(path, asset_truth_from_json);
}
ReadResult<PredictionLine> read_predictions(const std::filesystem::path& path) {
    return read_lines<PredictionLine>(path, prediction_from_json);
}
ReadResult<GroundTruthLine> read_ground_truths(const std::filesystem::path& path) {
    return read_lines<GroundTruthLine>(path, ground_truth_from_json);
}
ReadResult<RotationLine> read_rotations(const std::filesystem::path& path) {
    return read_lines<RotationLine>(path, rotation_from_json);
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("config must be a JSON object", 0);
    RunConfig c;
    auto get = [](const json& obj, const char* key, auto& dst) {
        if (obj.contains(key)) dst = obj.at(key).get<std::remove_reference_t<decltype(dst)>>();
    };
    try {
        const json& fit = j.contains("fit") ? j.at("fit") : (j.contains("annotator") && j.at("annotator").contains("fit")
                                                                 ? j.at("annotator").at("fit")
                                                                 : json::object());
        if (j.contains("annotator")) {
            const json& a = j.at("annotator");
            get(a, "smoothing_sigma_deg", c.annotator.smoothing_sigma_deg);
            get(a, "use_confidence_weights", c.annotator.use_confidence_weights);
            get(a, "min_views", c.annotator.min_views);
        }
        get(fit, "alpha_candidates", c.annotator.fit.alpha_candidates);
        get(fit, "phi_grid_step_deg", c.annotator.fit.phi_grid_step_deg);
        get(fit, "sigma_grid", c.annotator.fit.sigma_grid);
        get(fit, "refine_iters", c.annotator.fit.refine_iters);
        get(fit, "refine_starts", c.annotator.fit.refine_starts);
        get(fit, "uniformity_gain_threshold", c.annotator.fit.uniformity_gain_threshold);
        get(fit, "tie_epsilon", c.annotator.fit.tie_epsilon);
        if (j.contains("target")) {
            get(j.at("target"), "sigma", c.target.sigma);
            get(j.at("target"), "n_bins", c.target.n_bins);
        }
        if (j.contains("noise")) {
            const json& n = j.at("noise");
            get(n, "kappa", c.noise.kappa);
            get(n, "outlier_fraction", c.noise.outlier_fraction);
            get(n, "seed", c.noise.seed);
            if (n.contains("confidence")) {
                const json& cm = n.at("confidence");
                const std::string kind = cm.value("kind", "constant");
                if (kind == "constant") {
                    c.noise.confidence.kind = ConfidenceModelKind::constant;
                } else if (kind == "noise_dependent") {
                    c.noise.confidence.kind = ConfidenceModelKind::noise_dependent;
                } else {
                    throw FormatError("unknown confidence model '" + kind + "'", 0);
                }
                get(cm, "value", c.noise.confidence.value);
            }
        }
        get(j, "workers", c.workers);
        get(j, "log_level", c.log_level);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad config value: ") + e.what(), 0);
    }
    if (c.workers < 1) throw ValidationError("workers must be >= 1");
    validate(c.annotator);
    validate(c.noise);
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("config is not valid JSON: ") + e.what(), 0);
    }
    return run_config_from_json(j);
}

}  // namespace orientkit::io
