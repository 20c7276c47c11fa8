#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "orientkit/annotator.hpp"
#include "orientkit/calibration.hpp"
#include "orientkit/eval.hpp"
#include "orientkit/simulator.hpp"

namespace orientkit::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

template <typename T>
struct ReadResult {
    std::vector<T> items;
    /// Non-fatal notes such as unknown fields, prefixed with the line number.
    std::vector<std::string> warnings;
};

// Record <-> JSON. Parsers throw FormatError (line 0) on missing or mistyped
// fields and append unknown keys to `warnings`.
json to_json(const PseudoLabelRecord& r);
PseudoLabelRecord pseudo_label_from_json(const json& j, std::vector<std::string>* warnings = nullptr);

json to_json(const AssetAnnotation& a);
AssetAnnotation annotation_from_json(const json& j, std::vector<std::string>* warnings = nullptr);

json to_json(const CategoryReport& r);
CategoryReport category_report_from_json(const json& j, std::vector<std::string>* warnings = nullptr);

json to_json(const CalibrationDecision& d);
CalibrationDecision decision_from_json(const json& j, std::vector<std::string>* warnings = nullptr);

json to_json(const AssetTruth& t);
AssetTruth asset_truth_from_json(const json& j, std::vector<std::string>* warnings = nullptr);

/// Orientation prediction line: {sample_id, alpha, azimuth_deg, polar_deg, inplane_deg}.
json prediction_to_json(const std::string& sample_id, const DecodedOrientation& p);
/// Orientation ground-truth line: {sample_id, azimuth_deg, polar_deg, inplane_deg, alpha?}.
json ground_truth_to_json(const std::string& sample_id, const OrientationTriplet& t, std::optional<int> alpha);
/// Relative-rotation line: {sample_id, rotation: 9 numbers, row-major}.
json rotation_to_json(const std::string& sample_id, const RotationMatrix& r);

struct PredictionLine {
    std::string sample_id;
    DecodedOrientation predicted;
};
struct GroundTruthLine {
    std::string sample_id;
    OrientationTriplet truth;
    std::optional<int> alpha;
};
struct RotationLine {
    std::string sample_id;
    RotationMatrix rotation;
};

PredictionLine prediction_from_json(const json& j, std::vector<std::string>* warnings = nullptr);
GroundTruthLine ground_truth_from_json(const json& j, std::vector<std::string>* warnings = nullptr);
RotationLine rotation_from_json(const json& j, std::vector<std::string>* warnings = nullptr);

json to_json(const EvalReport& r);
json to_json(const CalibrationSummary& s);

/// One compact JSON object per line. Written to a temporary file that is then
/// renamed over `path`. Throws IoError when the location is not writable.
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& lines);
void write_json(const std::filesystem::path& path, const json& doc);

/// Appends one line and flushes it to disk under an advisory file lock.
void append_jsonl_line(const std::filesystem::path& path, const json& line);

// JSONL readers skip blank lines. They throw IoError when the file cannot be
// opened and FormatError naming the line for malformed content.
ReadResult<PseudoLabelRecord> read_pseudo_labels(const std::filesystem::path& path);
ReadResult<AssetAnnotation> read_annotations(const std::filesystem::path& path);
ReadResult<CategoryReport> read_category_reports(const std::filesystem::path& path);
ReadResult<CalibrationDecision> read_decisions(const std::filesystem::path& path);
ReadResult<AssetTruth> read_asset_truths(const std::filesystem::path& path);
ReadResult<PredictionLine> read_predictions(const std::filesystem::path& path);
ReadResult<GroundTruthLine> read_ground_truths(const std::filesystem::path& path);
ReadResult<RotationLine> read_rotations(const std::filesystem::path& path);

/// Settings shared by the command-line tools, loaded from a JSON config file.
struct RunConfig {
    AnnotatorConfig annotator;
    TargetConfig target;
    NoiseConfig noise;
    std::size_t workers = 1;
    std::string log_level = "info";
};

/// Reads {"annotator": {...}, "fit": {...}, "target": {...}, "noise": {...},
/// "workers": n, "log_level": "..."}; every section and key is optional.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const json& j);

}  // namespace orientkit::io
