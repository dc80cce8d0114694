#include <doctest.h>

#include <cmath>
#include <limits>

#include "occauth/classifiers.hpp"
#include "occauth/datastream.hpp"
#include "occauth/rng.hpp"
#include "occauth/types.hpp"

using namespace occauth;

TEST_CASE("compare_scores orders finite scores") {
    CHECK(compare_scores({0.7}, {0.2}) == std::strong_ordering::greater);
    CHECK(compare_scores({0.5}, {0.5}) == std::strong_ordering::equal);
    CHECK(compare_scores({-3.0}, {-1.0}) == std::strong_ordering::less);
}

TEST_CASE("compare_scores rejects non-finite input") {
    CHECK_THROWS_AS(compare_scores({std::numeric_limits<double>::quiet_NaN()}, {0.0}),
                    InvalidScoreError);
    CHECK_THROWS_AS(compare_scores({0.0}, {std::numeric_limits<double>::infinity()}),
                    InvalidScoreError);
}

TEST_CASE("FeatureVector rejects non-finite values") {
    CHECK_THROWS_AS(FeatureVector({1.0, std::numeric_limits<double>::quiet_NaN()}),
                    InvalidArgumentError);
    const FeatureVector v({1.0, 2.0, 3.0});
    CHECK(v.dim() == 3);
    CHECK(v[1] == 2.0);
}

TEST_CASE("rng streams are reproducible and tag-separated") {
    Rng a(RngSeed{42});
    Rng b(RngSeed{42});
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    CHECK(derive_seed(RngSeed{42}, "x") == derive_seed(RngSeed{42}, "x"));
    CHECK(derive_seed(RngSeed{42}, "x").value != derive_seed(RngSeed{42}, "y").value);
    CHECK(derive_seed(RngSeed{42}, std::uint64_t{0}).value !=
          derive_seed(RngSeed{42}, std::uint64_t{1}).value);
}

TEST_CASE("rng normal deviates have roughly standard moments") {
    Rng rng(RngSeed{7});
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum_sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
}

// Uniform orientation: a planted far outlier scores strictly below the
// centroid of the training cloud under every classifier adapter.
TEST_CASE("score orientation is uniform across all four classifiers") {
    SynthSpec spec;
    spec.n_genuine = 200;
    spec.modes = {{{0.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}}, 1.0}};
    spec.seed = RngSeed{11};
    const auto data = generate_synthetic(spec);

    const FeatureVector centroid({0.0, 0.0});
    const FeatureVector far_outlier({50.0, -50.0});

    for (OccKind kind : kAllOccKinds) {
        CAPTURE(to_string(kind));
        EnrollmentConfig config;
        config.kind = kind;
        config.ee_pca_keep_fraction = 1.0;  // keep both axes for the 2-D check
        const Enrollment enrollment = enroll(data.genuine, config);
        const double center_score = enrollment.score(centroid).value;
        const double outlier_score = enrollment.score(far_outlier).value;
        CHECK(outlier_score < center_score);
    }
}
