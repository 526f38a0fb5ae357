#include <doctest.h>

#include <cmath>

#include "adir/blend.hpp"
#include "adir/error.hpp"
#include "adir/rng.hpp"
#include "adir/synth.hpp"

using namespace adir;

namespace {

ProbabilityVector probs(std::initializer_list<double> values) {
    ProbabilityVector pv;
    pv.mode = ActivationMode::Sigmoid;
    int i = 0;
    for (double v : values)
        pv.p[i++] = v;
    return pv;
}

RestoreFn constant_stub(float value) {
    return [value](const Image& in) { return Image(in.width, in.height, value); };
}

RestoreFn offset_stub(float delta) {
    return [delta](const Image& in) {
        Image out = in;
        for (auto& v : out.samples)
            v = clamp01(v + delta);
        return out;
    };
}

// direct per-pixel evaluation of the weighted aggregation formula
Image brute_force_blend(const Image& x,
                        const std::vector<std::pair<RestoreFn, double>>& branches) {
    double mu_inv = 0.0;
    for (const auto& [fn, p] : branches)
        mu_inv += p;
    std::vector<Image> outs;
    for (const auto& [fn, p] : branches)
        outs.push_back(fn(x));
    Image result(x.width, x.height);
    for (int y = 0; y < x.height; ++y)
        for (int px = 0; px < x.width; ++px)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (size_t b = 0; b < branches.size(); ++b)
                    acc += (branches[b].second / mu_inv) * outs[b].at(px, y, c);
                result.set(px, y, c, static_cast<float>(acc));
            }
    return result;
}

} // namespace

TEST_CASE("weights: worked examples") {
    ActiveSet one = weights(probs({0.9, 0, 0, 0, 0, 0, 0}), 0.85);
    REQUIRE(one.weights.size() == 1);
    CHECK(one.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

    ActiveSet two = weights(probs({0.9, 0.9, 0, 0, 0, 0, 0}), 0.85);
    REQUIRE(two.weights.size() == 2);
    CHECK(two.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(two.weights[1] == doctest::Approx(0.5).epsilon(1e-12));

    ActiveSet uneven = weights(probs({0.9, 0.85, 0, 0, 0, 0, 0}), 0.85);
    REQUIRE(uneven.weights.size() == 2);
    CHECK(uneven.weights[0] == doctest::Approx(18.0 / 35.0).epsilon(1e-12));
    CHECK(uneven.weights[1] == doctest::Approx(17.0 / 35.0).epsilon(1e-12));
    double sum = uneven.weights[0] + uneven.weights[1];
    CHECK(std::fabs(sum - 1.0) <= 1e-9);
}

TEST_CASE("weights: no active degradation errors") {
    CHECK_THROWS_AS(weights(probs({0.5, 0.5, 0.1, 0, 0, 0, 0}), 0.85),
                    NoActiveDegradation);
}

TEST_CASE("weights are invariant to a common scale on the active probabilities") {
    // mu cancels any common factor c as long as everything stays active
    auto base = probs({0.9, 0.88, 0.86, 0, 0, 0, 0});
    ActiveSet a = weights(base, 0.5);
    auto scaled = base;
    for (auto& p : scaled.p)
        p *= 0.95;
    ActiveSet b = weights(scaled, 0.5);
    REQUIRE(a.weights.size() == b.weights.size());
    for (size_t i = 0; i < a.weights.size(); ++i)
        CHECK(std::fabs(a.weights[i] - b.weights[i]) <= 1e-9);
}

TEST_CASE("single active kind short-circuits bit-exactly") {
    RestorerRegistry registry;
    registry.set_function(DegradationKind::Denoising, offset_stub(-0.13f));
    Image x = make_clean_scene(24, 18, 2);
    Image direct = restore(DegradationKind::Denoising, x, registry);
    Image blended = aggregate(x, probs({0.9, 0, 0, 0, 0, 0, 0}), 0.85, registry);
    REQUIRE(blended.same_dims(direct));
    for (size_t i = 0; i < direct.samples.size(); ++i)
        CHECK(blended.samples[i] == direct.samples[i]);
}

TEST_CASE("two equal-probability stubs blend to the midpoint") {
    RestorerRegistry registry;
    registry.set_function(DegradationKind::Denoising, offset_stub(-0.2f));
    registry.set_function(DegradationKind::DehazingIndoor, offset_stub(0.0f));
    Image x(10, 10, 0.5f);
    Image out = aggregate(x, probs({0.9, 0.9, 0, 0, 0, 0, 0}), 0.85, registry);
    for (float v : out.samples)
        CHECK(v == doctest::Approx(0.4f).epsilon(1e-6)); // midpoint of 0.3 and 0.5
}

TEST_CASE("three-stub worked case matches the formula and the pixel-loop oracle") {
    RestorerRegistry registry;
    registry.set_function(DegradationKind::Denoising, constant_stub(0.0f));
    registry.set_function(DegradationKind::DehazingIndoor, constant_stub(0.5f));
    registry.set_function(DegradationKind::DehazingOutdoor, constant_stub(1.0f));
    Image x(8, 8, 0.5f);
    auto pv = probs({0.9, 0.88, 0.86, 0, 0, 0, 0});
    Image out = aggregate(x, pv, 0.85, registry);
    const double expected = (0.9 * 0.0 + 0.88 * 0.5 + 0.86 * 1.0) / (0.9 + 0.88 + 0.86);
    for (float v : out.samples)
        CHECK(v == doctest::Approx(expected).epsilon(1e-6)); // 1.30 / 2.64

    Image oracle = brute_force_blend(
        x, {{constant_stub(0.0f), 0.9}, {constant_stub(0.5f), 0.88},
            {constant_stub(1.0f), 0.86}});
    for (size_t i = 0; i < out.samples.size(); ++i)
        CHECK(std::fabs(static_cast<double>(out.samples[i]) - oracle.samples[i]) <= 1e-12);
}

TEST_CASE("aggregate matches the brute-force oracle on fuzzed stub cases") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        RestorerRegistry registry;
        std::vector<std::pair<RestoreFn, double>> branches;
        ProbabilityVector pv;
        pv.mode = ActivationMode::Sigmoid;
        int n_active = 2 + static_cast<int>(rng.below(4));
        for (int k = 0; k < kKindCount; ++k) {
            if (k < n_active) {
                float delta = static_cast<float>(rng.uniform(-0.3, 0.3));
                pv.p[k] = rng.uniform(0.86, 1.0);
                // skip SuperResolution's slot so sizes stay equal
                DegradationKind kind = static_cast<DegradationKind>(k);
                if (kind == DegradationKind::SuperResolution)
                    continue;
                registry.set_function(kind, offset_stub(delta));
                branches.push_back({offset_stub(delta), pv.p[k]});
            } else {
                pv.p[k] = rng.uniform(0.0, 0.5);
            }
        }
        pv.p[kind_index(DegradationKind::SuperResolution)] = 0.0;

        Image x = make_clean_scene(20, 14, 100 + trial);
        Image out = aggregate(x, pv, 0.85, registry);
        Image oracle = brute_force_blend(x, branches);
        REQUIRE(out.same_dims(oracle));
        for (size_t i = 0; i < out.samples.size(); ++i)
            CHECK(std::fabs(static_cast<double>(out.samples[i]) - oracle.samples[i]) <=
                  1e-12);

        // convexity: every pixel inside the branch envelope
        std::vector<Image> branch_outs;
        for (auto& [fn, p] : branches)
            branch_outs.push_back(fn(x));
        for (size_t i = 0; i < out.samples.size(); ++i) {
            float lo = 1.0f, hi = 0.0f;
            for (const auto& b : branch_outs) {
                lo = std::min(lo, b.samples[i]);
                hi = std::max(hi, b.samples[i]);
            }
            CHECK(out.samples[i] >= lo - 1e-6f);
            CHECK(out.samples[i] <= hi + 1e-6f);
        }
    }
}

TEST_CASE("convexity also holds with the real restorers") {
    RestorerRegistry registry;
    Image x = make_clean_scene(48, 48, 77);
    auto pv = probs({0.95, 0, 0, 0.9, 0.88, 0, 0}); // denoise + deblur + derain
    Image out = aggregate(x, pv, 0.85, registry);

    std::vector<Image> branches = {
        restore(DegradationKind::Denoising, x, registry),
        restore(DegradationKind::Deblurring, x, registry),
        restore(DegradationKind::Deraining, x, registry),
    };
    for (size_t i = 0; i < out.samples.size(); ++i) {
        float lo = 1.0f, hi = 0.0f;
        for (const auto& b : branches) {
            lo = std::min(lo, b.samples[i]);
            hi = std::max(hi, b.samples[i]);
        }
        CHECK(out.samples[i] >= lo - 1e-6f);
        CHECK(out.samples[i] <= hi + 1e-6f);
    }
}

TEST_CASE("SuperResolution composes after the blend and doubles dimensions") {
    RestorerRegistry registry;
    registry.set_function(DegradationKind::Denoising, offset_stub(0.1f));
    Image x = make_clean_scene(32, 24, 3);

    // single non-SR active: same size
    Image same = aggregate(x, probs({0.9, 0, 0, 0, 0, 0, 0}), 0.85, registry);
    CHECK(same.same_dims(x));

    // SR active with another kind: output exactly doubles
    Image doubled = aggregate(x, probs({0.9, 0, 0, 0, 0, 0, 0.9}), 0.85, registry);
    CHECK(doubled.width == 64);
    CHECK(doubled.height == 48);

    // SR alone is the single-active short circuit
    Image sr_only = aggregate(x, probs({0, 0, 0, 0, 0, 0, 0.9}), 0.85, registry);
    Image direct = restore(DegradationKind::SuperResolution, x, registry);
    REQUIRE(sr_only.same_dims(direct));
    for (size_t i = 0; i < direct.samples.size(); ++i)
        CHECK(sr_only.samples[i] == direct.samples[i]);
}

TEST_CASE("sequential mode chains restorers in descending probability order") {
    RestorerRegistry registry;
    // order-sensitive stubs: +0.2 then clamp vs *0.5
    registry.set_function(DegradationKind::Denoising, offset_stub(0.2f));
    registry.set_function(DegradationKind::DehazingIndoor, [](const Image& in) {
        Image out = in;
        for (auto& v : out.samples)
            v *= 0.5f;
        return out;
    });
    Image x(6, 6, 0.6f);
    // indoor has the larger p so it runs first: 0.6*0.5 + 0.2 = 0.5
    Image out = aggregate(x, probs({0.9, 0.95, 0, 0, 0, 0, 0}), 0.85, registry,
                          BlendMode::Sequential);
    for (float v : out.samples)
        CHECK(v == doctest::Approx(0.5f).epsilon(1e-6));
}

TEST_CASE("aggregate with nothing active errors") {
    RestorerRegistry registry;
    Image x(8, 8, 0.5f);
    CHECK_THROWS_AS(aggregate(x, probs({0.1, 0.2, 0, 0, 0, 0, 0}), 0.85, registry),
                    NoActiveDegradation);
}
