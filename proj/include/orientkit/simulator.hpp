#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orientkit/annotator.hpp"
#include "orientkit/eval.hpp"
#include "orientkit/rng.hpp"

namespace orientkit {

enum class ConfidenceModelKind { constant, noise_dependent };

struct ConfidenceModel {
    ConfidenceModelKind kind = ConfidenceModelKind::constant;
    /// Confidence of every view for the constant model.
    double value = 1.0;
};

struct NoiseConfig {
    /// von Mises concentration of azimuth noise; 0 = uniform, +inf = noiseless.
    double kappa = 20.0;
    /// Probability that a view's canonical azimuth is replaced by a uniform draw.
    double outlier_fraction = 0.0;
    ConfidenceModel confidence;
    std::uint64_t seed = 0;
};

void validate(const NoiseConfig& noise);

/// Concentration whose small-angle standard deviation is `deg` degrees.
double kappa_for_stddev_deg(double deg);

/// One von Mises draw in degrees (not wrapped).
double sample_von_mises(double mu_deg, double kappa, CounterRng& rng);

struct SimAssetSpec {
    std::string asset_id;
    std::string category;
    int alpha_true = 1;
    /// In [0, 360/alpha_true) when alpha_true >= 1; ignored for 0.
    double phi_true_deg = 0.0;
    int n_views = 64;
    NoiseConfig noise;
};

void validate(const SimAssetSpec& spec);

/// Simulated per-view pseudo-labels. Views look at the asset from uniformly
/// random camera azimuths; each view sees a uniformly chosen true front face
/// plus von Mises noise, expressed in that view's camera frame. Outliers
/// replace the canonical azimuth with a uniform draw. Deterministic in the seed.
std::vector<PseudoLabelRecord> gen_asset(const SimAssetSpec& spec);

struct AssetTruth {
    std::string asset_id;
    std::string category;
    int alpha = 0;
    double phi_deg = 0.0;
    bool corrupted = false;

    friend bool operator==(const AssetTruth&, const AssetTruth&) = default;
};

struct CorpusConfig {
    int n_assets = 100;
    /// 0 picks max(1, n_assets / 10).
    int n_categories = 0;
    int n_views = 64;
    NoiseConfig noise;
    /// Exactly round(fraction * n_assets) assets get a symmetry class that
    /// differs from their category's class.
    double corrupt_fraction = 0.0;
    std::uint64_t seed = 0;
};

struct Corpus {
    std::vector<PseudoLabelRecord> records;
    std::vector<AssetTruth> truths;
};

/// Category-structured corpus: every category has one symmetry class and
/// assets are assigned to categories round-robin. Per-asset RNG substreams
/// make the output identical for any worker count.
Corpus gen_corpus(const CorpusConfig& config, std::size_t workers = 1);

/// Category truth only (no pseudo-labels); used when annotations are
/// synthesized directly from the truths.
std::vector<AssetTruth> gen_corpus_truths(const CorpusConfig& config);

/// Fraction of categories that contain at least one corrupted asset.
double contaminated_category_fraction(const std::vector<AssetTruth>& truths);

/// Largest-remainder allocation of n items over classes with the given fractions.
std::map<int, int> allocate_counts(int n, const std::map<int, double>& class_mix);

struct EvalDataset {
    std::vector<OrientationEvalSample> orientation;
    /// Absolute predictions before symmetry decoding, aligned with `orientation`.
    std::vector<OrientationTriplet> predicted_triplets;
    /// Consecutive sample pairs; prediction is composed from the noisy absolute
    /// orientations, ground truth from the true ones.
    std::vector<RotationEvalSample> relative;
};

/// Samples with known symmetry class. Ground-truth azimuth is the front face
/// closest to the camera; predictions carry the true class and noisy angles.
EvalDataset gen_eval_dataset(int n_samples, const std::map<int, double>& class_mix,
                             const NoiseConfig& noise);

/// Replaces every prediction's symmetry class with a uniform draw from {0, 1, 2, 4}.
void randomize_symmetry(std::vector<OrientationEvalSample>& samples, std::uint64_t seed);

}  // namespace orientkit
