#include <doctest.h>

#include <cmath>
#include <set>

#include "orientkit/angles.hpp"
#include "orientkit/errors.hpp"
#include "orientkit/simulator.hpp"

using namespace orientkit;

namespace {

struct CircularMean {
    double mean_deg;
    double resultant;
};

CircularMean circular_mean(const std::vector<double>& deg) {
    double s = 0.0, c = 0.0;
    for (double d : deg) {
        s += std::sin(deg_to_rad(d));
        c += std::cos(deg_to_rad(d));
    }
    const double n = static_cast<double>(deg.size());
    return {wrap_deg(rad_to_deg(std::atan2(s, c))), std::hypot(s, c) / n};
}

SimAssetSpec spec(int alpha, double phi, int views, double kappa, double outliers, std::uint64_t seed) {
    SimAssetSpec s;
    s.asset_id = "asset";
    s.category = "cat";
    s.alpha_true = alpha;
    s.phi_true_deg = phi;
    s.n_views = views;
    s.noise.kappa = kappa;
    s.noise.outlier_fraction = outliers;
    s.noise.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("sample_von_mises examples") {
    CounterRng rng(1);
    for (int i = 0; i < 10000; ++i) CHECK(circular_dist_deg(sample_von_mises(37.0, 1e6, rng), 37.0) <= 0.5);

    std::vector<double> uniform, around;
    CounterRng r0(2), r20(3);
    for (int i = 0; i < 100000; ++i) {
        uniform.push_back(sample_von_mises(0.0, 0.0, r0));
        around.push_back(sample_von_mises(90.0, 20.0, r20));
    }
    CHECK(circular_mean(uniform).resultant < 0.02);
    CHECK(circular_dist_deg(circular_mean(around).mean_deg, 90.0) <= 1.0);
    // mean resultant length of a von Mises draw is I1(k)/I0(k)
    CHECK(circular_mean(around).resultant == doctest::Approx(std::cyl_bessel_i(1.0, 20.0) / std::cyl_bessel_i(0.0, 20.0)).epsilon(2e-3));
    CHECK_THROWS_AS(sample_von_mises(0.0, -1.0, r0), ValidationError);
}

TEST_CASE("von Mises draws for large kappa use the normal limit") {
    CounterRng rng(4);
    std::vector<double> d;
    for (int i = 0; i < 20000; ++i) d.push_back(circular_diff_deg(sample_von_mises(0.0, 1e9, rng), 0.0));
    double var = 0.0;
    for (double x : d) var += x * x;
    var /= static_cast<double>(d.size());
    CHECK(std::sqrt(var) == doctest::Approx(rad_to_deg(1.0 / std::sqrt(1e9))).epsilon(0.03));
}

TEST_CASE("gen_asset examples") {
    for (const auto& r : gen_asset(spec(1, 100.0, 200, 1e6, 0.0, 5))) {
        CHECK(circular_dist_deg(project_to_canonical(r), 100.0) <= 0.5);
    }
    for (const auto& r : gen_asset(spec(2, 60.0, 200, 1e6, 0.0, 6))) {
        const double c = project_to_canonical(r);
        CHECK(std::min(circular_dist_deg(c, 60.0), circular_dist_deg(c, 240.0)) <= 0.5);
    }
    const auto s = spec(4, 12.5, 64, 20.0, 0.1, 7);
    CHECK(gen_asset(s) == gen_asset(s));
    auto other = s;
    other.noise.seed = 8;
    CHECK_FALSE(gen_asset(s) == gen_asset(other));
}

TEST_CASE("gen_asset records are valid and named") {
    const auto records = gen_asset(spec(0, 0.0, 20, 20.0, 0.0, 9));
    REQUIRE(records.size() == 20);
    std::set<std::string> views;
    for (const auto& r : records) {
        CHECK_NOTHROW(validate(r));
        views.insert(r.view_id);
    }
    CHECK(views.size() == 20);
    CHECK(records[3].view_id == "v003");
}

TEST_CASE("every front face is sampled") {
    std::vector<int> hits(4, 0);
    for (const auto& r : gen_asset(spec(4, 10.0, 400, 1e6, 0.0, 10))) {
        const double c = project_to_canonical(r);
        hits[static_cast<std::size_t>(std::lround(wrap_deg(c - 10.0) / 90.0)) % 4]++;
    }
    for (int h : hits) CHECK(h > 60);
}

TEST_CASE("outlier count follows the binomial expectation") {
    const int n = 100000;
    const double f = 0.15;
    int outliers = 0;
    for (const auto& r : gen_asset(spec(1, 200.0, n, INFINITY, f, 11))) {
        if (circular_dist_deg(project_to_canonical(r), 200.0) > 1e-3) ++outliers;
    }
    const double mean = n * f, sd = std::sqrt(n * f * (1.0 - f));
    CHECK(std::fabs(outliers - mean) <= 3.0 * sd);
}

TEST_CASE("gen_asset validates its spec") {
    CHECK_THROWS_AS(gen_asset(spec(3, 0.0, 10, 20.0, 0.0, 1)), ValidationError);
    CHECK_THROWS_AS(gen_asset(spec(2, 180.0, 10, 20.0, 0.0, 1)), ValidationError);
    CHECK_THROWS_AS(gen_asset(spec(1, 0.0, 0, 20.0, 0.0, 1)), ValidationError);
    CHECK_THROWS_AS(gen_asset(spec(1, 0.0, 10, -1.0, 0.0, 1)), ValidationError);
    CHECK_THROWS_AS(gen_asset(spec(1, 0.0, 10, 20.0, 1.5, 1)), ValidationError);
}

TEST_CASE("noise-dependent confidence tracks the deviation") {
    auto s = spec(1, 0.0, 500, 5.0, 0.0, 12);
    s.noise.confidence.kind = ConfidenceModelKind::noise_dependent;
    double near = 0.0, far = 0.0;
    int n_near = 0, n_far = 0;
    for (const auto& r : gen_asset(s)) {
        CHECK(r.confidence >= 0.0);
        CHECK(r.confidence <= 1.0);
        if (circular_dist_deg(project_to_canonical(r), 0.0) < 10.0) {
            near += r.confidence;
            ++n_near;
        } else if (circular_dist_deg(project_to_canonical(r), 0.0) > 40.0) {
            far += r.confidence;
            ++n_far;
        }
    }
    REQUIRE(n_near > 0);
    REQUIRE(n_far > 0);
    CHECK(near / n_near > far / n_far);
}

TEST_CASE("allocate_counts uses largest remainders") {
    const std::map<int, double> quarter{{0, 0.25}, {1, 0.25}, {2, 0.25}, {4, 0.25}};
    CHECK(allocate_counts(400, quarter) == std::map<int, int>{{0, 100}, {1, 100}, {2, 100}, {4, 100}});
    CHECK(allocate_counts(10, quarter) == std::map<int, int>{{0, 3}, {1, 3}, {2, 2}, {4, 2}});
    CHECK(allocate_counts(7, {{1, 0.5}, {2, 0.5}}) == std::map<int, int>{{1, 4}, {2, 3}});
    CHECK_THROWS_AS(allocate_counts(10, {{1, 0.5}, {2, 0.4}}), ValidationError);
    CHECK_THROWS_AS(allocate_counts(10, {{3, 1.0}}), ValidationError);
}

TEST_CASE("gen_eval_dataset examples") {
    const std::map<int, double> quarter{{0, 0.25}, {1, 0.25}, {2, 0.25}, {4, 0.25}};
    NoiseConfig exact;
    exact.kappa = INFINITY;
    exact.seed = 13;
    const auto ds = gen_eval_dataset(200, quarter, exact);
    const auto report = evaluate_orientation(ds.orientation);
    CHECK(report.symmetry_acc == 1.0);
    CHECK(report.median_deg == 0.0);
    CHECK(evaluate_relative_rotation(ds.relative).median_deg <= 1e-6);

    const auto ds400 = gen_eval_dataset(400, quarter, exact);
    std::map<int, int> counts;
    for (const auto& s : ds400.orientation) counts[*s.gt_alpha]++;
    CHECK(counts == std::map<int, int>{{0, 100}, {1, 100}, {2, 100}, {4, 100}});

    NoiseConfig noisy;
    noisy.seed = 9;
    auto big = gen_eval_dataset(10000, quarter, noisy);
    randomize_symmetry(big.orientation, 9);
    const double acc = *evaluate_orientation(big.orientation).symmetry_acc;
    CHECK(std::fabs(acc - 0.25) <= 0.02);

    CHECK_THROWS_AS(gen_eval_dataset(10, {{1, 0.5}}, exact), ValidationError);
    CHECK_THROWS_AS(gen_eval_dataset(0, quarter, exact), ValidationError);
}

TEST_CASE("gen_eval_dataset ground truth faces the camera") {
    NoiseConfig noise;
    noise.seed = 14;
    const auto ds = gen_eval_dataset(300, {{0, 0.25}, {1, 0.25}, {2, 0.25}, {4, 0.25}}, noise);
    for (const auto& s : ds.orientation) {
        const int alpha = *s.gt_alpha;
        if (alpha < 2) continue;
        CHECK(circular_dist_deg(s.ground_truth.azimuth_deg, 0.0) <= 180.0 / alpha + 1e-6);
    }
    CHECK(ds.relative.size() == 150);
}

TEST_CASE("gen_corpus structure") {
    CorpusConfig cfg;
    cfg.n_assets = 500;
    cfg.n_categories = 50;
    cfg.n_views = 8;
    cfg.corrupt_fraction = 0.1;
    cfg.seed = 5;
    const auto truths = gen_corpus_truths(cfg);
    REQUIRE(truths.size() == 500);
    std::map<std::string, std::map<int, int>> per_cat;
    int corrupted = 0;
    for (const auto& t : truths) {
        per_cat[t.category][t.alpha]++;
        if (t.corrupted) ++corrupted;
        CHECK(is_symmetry_class(t.alpha));
        if (t.alpha >= 1) CHECK(t.phi_deg < 360.0 / t.alpha);
    }
    CHECK(corrupted == 50);
    CHECK(per_cat.size() == 50);
    for (const auto& t : truths) {
        if (!t.corrupted) continue;
        // the corrupted asset's class differs from every clean asset of its category
        for (const auto& u : truths) {
            if (u.category == t.category && !u.corrupted) CHECK(u.alpha != t.alpha);
        }
    }
    std::set<std::string> contaminated;
    for (const auto& t : truths) {
        if (t.corrupted) contaminated.insert(t.category);
    }
    CHECK(contaminated_category_fraction(truths) == static_cast<double>(contaminated.size()) / 50.0);

    const auto a = gen_corpus(cfg, 1);
    const auto b = gen_corpus(cfg, 4);
    CHECK(a.records == b.records);
    CHECK(a.truths == b.truths);
    CHECK(a.truths == truths);
    CHECK(a.records.size() == 500u * 8u);
}

TEST_CASE("gen_corpus validates its config") {
    CorpusConfig cfg;
    cfg.n_assets = 0;
    CHECK_THROWS_AS(gen_corpus(cfg), ValidationError);
    cfg = {};
    cfg.corrupt_fraction = 1.5;
    CHECK_THROWS_AS(gen_corpus(cfg), ValidationError);
    cfg = {};
    cfg.n_views = 0;
    CHECK_THROWS_AS(gen_corpus(cfg), ValidationError);
}
