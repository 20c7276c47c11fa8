#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "orientkit/io.hpp"

namespace orientkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

struct SimulateOptions {
    std::filesystem::path out_dir;
    CorpusConfig corpus;
    std::size_t workers = 1;
};

struct SimulateEvalOptions {
    std::filesystem::path out_dir;
    int samples = 1000;
    /// perfect, noisy or random (noisy angles with a uniformly drawn symmetry class).
    std::string predictor = "noisy";
    NoiseConfig noise;
};

struct AnnotateOptions {
    std::filesystem::path input;
    std::filesystem::path out;
    AnnotatorConfig annotator;
    std::size_t workers = 1;
};

struct CalibrateOptions {
    std::filesystem::path annotations;
    std::optional<std::filesystem::path> decisions;
    std::filesystem::path out_dir;
    std::size_t workers = 1;
};

struct EvalOptions {
    std::filesystem::path predictions;
    std::filesystem::path ground_truth;
    std::filesystem::path out;
    /// orientation or relative.
    std::string kind = "orientation";
    CandidateMode mode = CandidateMode::camera_facing;
};

// Commands throw on failure; run_command maps the exception to an exit code.
void cmd_simulate(const SimulateOptions& opt, std::ostream& out);
void cmd_simulate_eval(const SimulateEvalOptions& opt, std::ostream& out);
void cmd_annotate(const AnnotateOptions& opt, std::ostream& out);
void cmd_calibrate(const CalibrateOptions& opt, std::ostream& out);
void cmd_eval(const EvalOptions& opt, std::ostream& out);

/// Runs `fn`, printing a diagnostic to `err` on failure. Validation, format,
/// missing-input and unwritable-output errors give 2; anything else gives 3.
int run_command(const std::function<void()>& fn, std::ostream& err);

}  // namespace orientkit::cli
