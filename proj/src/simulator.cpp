#include "orientkit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <set>

#include "orientkit/angles.hpp"
#include "orientkit/errors.hpp"
#include "orientkit/parallel.hpp"

namespace orientkit {

namespace {

constexpr int kClasses[] = {0, 1, 2, 4};

// Small-noise model for polar and in-plane predictions, degrees.
constexpr double kPolarGtSpreadDeg = 5.0;
constexpr double kViewAngleNoiseDeg = 2.0;

double clamp_polar(double p) { return std::clamp(p, 0.0, 179.999999); }

// Quantized to serialization precision and kept inside [0, 360).
double q_wrap(double deg) { return wrap_deg(quantize_angle(wrap_deg(deg))); }

// Deterministic Fisher-Yates (std::shuffle is implementation-defined).
template <typename T>
void shuffle(std::vector<T>& v, CounterRng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

// Additive noise for a non-azimuth angle at the given concentration.
double small_angle_noise_deg(double kappa, CounterRng& rng) {
    const double n = rng.normal();
    if (std::isinf(kappa)) return 0.0;
    if (kappa <= 0.0) return 0.0;
    return rad_to_deg(n / std::sqrt(kappa));
}

}  // namespace

void validate(const NoiseConfig& noise) {
    if (std::isnan(noise.kappa) || noise.kappa < 0.0) throw ValidationError("kappa must be >= 0");
    if (!(noise.outlier_fraction >= 0.0 && noise.outlier_fraction <= 1.0)) {
        throw ValidationError("outlier_fraction must be in [0, 1]");
    }
    if (noise.confidence.kind == ConfidenceModelKind::constant &&
        !(noise.confidence.value >= 0.0 && noise.confidence.value <= 1.0)) {
        throw ValidationError("constant confidence must be in [0, 1]");
    }
}

double kappa_for_stddev_deg(double deg) {
    if (!(deg > 0.0)) throw ValidationError("standard deviation must be > 0");
    const double s = deg_to_rad(deg);
    return 1.0 / (s * s);
}

double sample_von_mises(double mu_deg, double kappa, CounterRng& rng) {
    return rad_to_deg(rng.von_mises(deg_to_rad(mu_deg), kappa));
}

void validate(const SimAssetSpec& spec) {
    if (spec.asset_id.empty()) throw ValidationError("asset_id must not be empty");
    if (!is_symmetry_class(spec.alpha_true)) throw ValidationError("alpha_true must be one of {0, 1, 2, 4}");
    if (spec.alpha_true >= 1) {
        const double window = 360.0 / spec.alpha_true;
        if (!(spec.phi_true_deg >= 0.0 && spec.phi_true_deg < window)) {
            throw ValidationError(fmt::format("phi_true_deg must be in [0, {})", window));
        }
    }
    if (spec.n_views < 1) throw ValidationError("n_views must be >= 1");
    validate(spec.noise);
}

std::vector<PseudoLabelRecord> gen_asset(const SimAssetSpec& spec) {
    validate(spec);
    CounterRng rng(spec.noise.seed);
    std::vector<PseudoLabelRecord> out;
    out.reserve(static_cast<std::size_t>(spec.n_views));
    for (int v = 0; v < spec.n_views; ++v) {
        // Fixed draw order per view keeps streams aligned across configurations.
        const double camera = 360.0 * rng.uniform();
        const double face_u = rng.uniform();
        const double noise = sample_von_mises(0.0, spec.noise.kappa, rng);
        const bool outlier = rng.uniform() < spec.noise.outlier_fraction;
        const double outlier_az = 360.0 * rng.uniform();
        const double polar_noise = kViewAngleNoiseDeg * rng.normal();
        const double inplane_noise = kViewAngleNoiseDeg * rng.normal();

        double face = 0.0;
        if (spec.alpha_true == 0) {
            face = 360.0 * face_u;
        } else {
            const auto k = std::min(static_cast<int>(face_u * spec.alpha_true), spec.alpha_true - 1);
            face = spec.phi_true_deg + k * 360.0 / spec.alpha_true;
        }
        const double canonical = outlier ? outlier_az : wrap_deg(face + noise);
        const double deviation = outlier ? circular_dist_deg(outlier_az, face) : std::abs(noise);

        PseudoLabelRecord r;
        r.asset_id = spec.asset_id;
        r.category = spec.category;
        r.view_id = fmt::format("v{:03d}", v);
        r.camera_azimuth_deg = q_wrap(camera);
        r.predicted.azimuth_deg = q_wrap(canonical - r.camera_azimuth_deg);
        r.predicted.polar_deg = quantize_angle(clamp_polar(90.0 + polar_noise));
        r.predicted.inplane_deg = q_wrap(inplane_noise);
        if (spec.noise.confidence.kind == ConfidenceModelKind::constant) {
            r.confidence = spec.noise.confidence.value;
        } else {
            r.confidence = std::clamp(0.5 * (1.0 + std::cos(deg_to_rad(deviation))), 0.0, 1.0);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<AssetTruth> gen_corpus_truths(const CorpusConfig& config) {
    if (config.n_assets < 1) throw ValidationError("n_assets must be >= 1");
    if (config.n_categories < 0) throw ValidationError("n_categories must be >= 0");
    if (!(config.corrupt_fraction >= 0.0 && config.corrupt_fraction <= 1.0)) {
        throw ValidationError("corrupt_fraction must be in [0, 1]");
    }
    const int n_cat = config.n_categories > 0 ? config.n_categories : std::max(1, config.n_assets / 10);
    CounterRng root(config.seed);

    std::vector<int> category_alpha(static_cast<std::size_t>(n_cat));
    CounterRng cat_rng = root.substream(0xCA7E6025ULL);
    for (auto& a : category_alpha) a = kClasses[cat_rng.below(4)];

    std::vector<AssetTruth> truths(static_cast<std::size_t>(config.n_assets));
    for (int i = 0; i < config.n_assets; ++i) {
        auto& t = truths[static_cast<std::size_t>(i)];
        const int c = i % n_cat;
        t.asset_id = fmt::format("asset_{:05d}", i);
        t.category = fmt::format("cat_{:03d}", c);
        t.alpha = category_alpha[static_cast<std::size_t>(c)];
    }

    // Exact number of corrupted assets, chosen without replacement.
    const auto n_corrupt = static_cast<std::size_t>(std::lround(config.corrupt_fraction * config.n_assets));
    std::vector<std::size_t> order(truths.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng pick_rng = root.substream(0xBAD0A55E7ULL);
    shuffle(order, pick_rng);
    for (std::size_t j = 0; j < n_corrupt; ++j) {
        auto& t = truths[order[j]];
        std::vector<int> others;
        for (int a : kClasses) {
            if (a != t.alpha) others.push_back(a);
        }
        t.alpha = others[pick_rng.below(others.size())];
        t.corrupted = true;
    }

    for (std::size_t i = 0; i < truths.size(); ++i) {
        auto& t = truths[i];
        CounterRng phase_rng = root.substream(0x10000ULL + i);
        t.phi_deg = t.alpha >= 1 ? quantize_angle(phase_rng.uniform() * 360.0 / t.alpha) : 0.0;
        if (t.alpha >= 1) t.phi_deg = canonicalize_phase(t.phi_deg, t.alpha);
    }
    return truths;
}

Corpus gen_corpus(const CorpusConfig& config, std::size_t workers) {
    validate(config.noise);
    if (config.n_views < 1) throw ValidationError("n_views must be >= 1");
    Corpus corpus;
    corpus.truths = gen_corpus_truths(config);
    const CounterRng root(config.seed);

    std::vector<std::vector<PseudoLabelRecord>> per_asset(corpus.truths.size());
    parallel_for(corpus.truths.size(), workers, [&](std::size_t i) {
        const auto& t = corpus.truths[i];
        SimAssetSpec spec;
        spec.asset_id = t.asset_id;
        spec.category = t.category;
        spec.alpha_true = t.alpha;
        spec.phi_true_deg = t.phi_deg;
        spec.n_views = config.n_views;
        spec.noise = config.noise;
        spec.noise.seed = root.substream(0x20000ULL + i).next_u64();
        per_asset[i] = gen_asset(spec);
    });
    for (auto& recs : per_asset) {
        corpus.records.insert(corpus.records.end(), std::make_move_iterator(recs.begin()),
                              std::make_move_iterator(recs.end()));
    }
    return corpus;
}

double contaminated_category_fraction(const std::vector<AssetTruth>& truths) {
    std::set<std::string> all, dirty;
    for (const auto& t : truths) {
        all.insert(t.category);
        if (t.corrupted) dirty.insert(t.category);
    }
    return all.empty() ? 0.0 : static_cast<double>(dirty.size()) / static_cast<double>(all.size());
}

std::map<int, int> allocate_counts(int n, const std::map<int, double>& class_mix) {
    if (n < 0) throw ValidationError("count must be >= 0");
    if (class_mix.empty()) throw ValidationError("class mix must not be empty");
    double total = 0.0;
    for (const auto& [cls, f] : class_mix) {
        if (!is_symmetry_class(cls)) throw ValidationError("class mix key must be one of {0, 1, 2, 4}");
        if (!(f >= 0.0)) throw ValidationError("class fractions must be >= 0");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("class fractions must sum to 1");

    std::map<int, int> counts;
    std::vector<std::pair<double, int>> remainders;  // (remainder, class)
    int assigned = 0;
    for (const auto& [cls, f] : class_mix) {
        const double exact = f * n;
        // Guard against 0.25 * 400 landing at 99.99999999.
        const auto base = static_cast<int>(std::floor(exact + 1e-9));
        counts[cls] = base;
        assigned += base;
        remainders.emplace_back(exact - base, cls);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[remainders[i % remainders.size()].second];
    return counts;
}

EvalDataset gen_eval_dataset(int n_samples, const std::map<int, double>& class_mix, const NoiseConfig& noise) {
    if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
    validate(noise);
    const auto counts = allocate_counts(n_samples, class_mix);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n_samples));
    for (const auto& [cls, c] : counts) labels.insert(labels.end(), static_cast<std::size_t>(c), cls);
    CounterRng root(noise.seed);
    CounterRng label_rng = root.substream(0x1AB315ULL);
    shuffle(labels, label_rng);

    EvalDataset ds;
    ds.orientation.resize(labels.size());
    ds.predicted_triplets.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        CounterRng rng = root.substream(0x30000ULL + i);
        const int alpha = labels[i];
        const double phase = 360.0 * rng.uniform();
        const double polar = clamp_polar(90.0 + kPolarGtSpreadDeg * rng.normal());
        const double inplane = wrap_deg(kPolarGtSpreadDeg * rng.normal());
        const double az_noise = sample_von_mises(0.0, noise.kappa, rng);
        const bool outlier = rng.uniform() < noise.outlier_fraction;
        const double outlier_az = 360.0 * rng.uniform();
        const double pol_noise = small_angle_noise_deg(noise.kappa, rng);
        const double rot_noise = small_angle_noise_deg(noise.kappa, rng);

        OrientationTriplet gt{q_wrap(phase), quantize_angle(polar), q_wrap(inplane)};
        if (alpha >= 1) {
            // Single-annotation benchmarks label the face nearest the camera.
            gt.azimuth_deg = q_wrap(select_camera_facing(symmetry_candidates(phase, alpha)));
        }
        const OrientationTriplet pred{q_wrap(outlier ? outlier_az : gt.azimuth_deg + az_noise),
                                      quantize_angle(clamp_polar(gt.polar_deg + pol_noise)),
                                      q_wrap(gt.inplane_deg + rot_noise)};

        auto& s = ds.orientation[i];
        s.sample_id = fmt::format("s{:06d}", i);
        s.ground_truth = gt;
        s.gt_alpha = alpha;
        s.predicted = make_decoded(alpha, pred.azimuth_deg, pred.polar_deg, pred.inplane_deg);
        ds.predicted_triplets[i] = pred;
    }
    for (std::size_t i = 0; i + 1 < labels.size(); i += 2) {
        RotationEvalSample r;
        r.sample_id = fmt::format("p{:06d}", i / 2);
        r.ground_truth_relative =
            relative_from_absolute(ds.orientation[i].ground_truth, ds.orientation[i + 1].ground_truth);
        r.predicted_relative = relative_from_absolute(ds.predicted_triplets[i], ds.predicted_triplets[i + 1]);
        ds.relative.push_back(std::move(r));
    }
    return ds;
}

void randomize_symmetry(std::vector<OrientationEvalSample>& samples, std::uint64_t seed) {
    CounterRng rng(seed);
    for (auto& s : samples) {
        const int alpha = kClasses[rng.below(4)];
        s.predicted = make_decoded(alpha, s.predicted.azimuth_deg, s.predicted.polar_deg, s.predicted.inplane_deg);
    }
}

}  // namespace orientkit
