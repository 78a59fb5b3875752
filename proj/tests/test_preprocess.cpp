#include "support.hpp"

#include <gtest/gtest.h>

using namespace hsvd;
using namespace hsvd::testing;

namespace {

const Acquisition phantom_acq{5e-4, 123.2, 4.7};

std::vector<HarmonicComponent> metabolites() {
    return {{1.0, -8, ppm_to_hz(2.01, phantom_acq), 0.0}, {0.8, -9, ppm_to_hz(3.03, phantom_acq), 0.0}, {0.6, -9, ppm_to_hz(3.22, phantom_acq), 0.0}};
}

std::vector<HarmonicComponent> water_triplet() {
    return {{20.0, -12, ppm_to_hz(4.70, phantom_acq), 0.0}, {6.0, -15, ppm_to_hz(4.66, phantom_acq), 0.3}, {4.0, -15, ppm_to_hz(4.75, phantom_acq), -0.2}};
}

double max_deviation(const Fid& a, const Fid& b) {
    double worst = 0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        worst = std::max(worst, std::abs(a[n] - b[n]));
    }
    return worst;
}

double hankel_ratio(const Fid& fid, std::size_t k) {
    const auto s = linalg::svd(hankel(fid, default_dims(fid.size(), k))).sigma;
    return s[k] / s[0];
}

// white noise level giving the requested SNR (mean |s|^2 / sigma^2) in dB
double sigma_for_snr(const Fid& clean, double db) { return std::sqrt(clean.energy() / static_cast<double>(clean.size()) / std::pow(10.0, db / 10.0)); }

} // namespace

TEST(FilterRank, NoiselessSignalIsReproduced) {
    std::mt19937_64 rng(2);
    const auto      fid = synthesize(random_components(rng, 5, 256, 1e-3), 256, test_acquisition());
    EXPECT_LE(max_deviation(filter_rank(fid, 5), fid), 1e-8 * max_abs(fid.samples()));
}

TEST(FilterRank, ReducesNoiseAtTwentyDecibels) {
    std::mt19937_64 rng(3);
    const auto      clean = synthesize(random_components(rng, 4, 512, 1e-3), 512, test_acquisition());
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto noisy    = add_noise(clean, sigma_for_snr(clean, 20), seed);
        const auto filtered = filter_rank(noisy, 4);
        EXPECT_LT(distance_energy(filtered.samples(), clean.samples()), distance_energy(noisy.samples(), clean.samples()));
        EXPECT_EQ(filtered.acquisition(), noisy.acquisition());
        EXPECT_EQ(filtered.size(), noisy.size());
    }
}

TEST(FilterRank, OutputIsExactlyAModel) {
    std::mt19937_64 rng(4);
    const auto      clean    = synthesize(random_components(rng, 3, 256, 1e-3), 256, test_acquisition());
    const auto      filtered = filter_rank(add_noise(clean, 0.1, 9), 3);
    EXPECT_LE(decompose(filtered, 3).residual_energy, 1e-10 * filtered.energy());
}

TEST(FilterRank, PhantomSizedOrder32) {
    const auto fid = add_noise(synthesize(metabolites(), 2048, phantom_acq), 0.01, 1);
    const auto out = filter_rank(fid, 32);
    for (const auto& s : out.samples()) {
        ASSERT_TRUE(std::isfinite(s.real()) && std::isfinite(s.imag()));
    }
}

TEST(Cadzow, NoiselessInputIsFixedPoint) {
    std::mt19937_64 rng(5);
    const auto      fid = synthesize(random_components(rng, 4, 200, 1e-3), 200, test_acquisition());
    const auto      res = cadzow(fid, 4, 10, 1e-8);
    EXPECT_EQ(res.iterations, 1U);
    EXPECT_TRUE(res.converged);
    EXPECT_LE(max_deviation(res.fid, fid), 1e-9 * max_abs(fid.samples()));
}

TEST(Cadzow, RankRatioNonIncreasingOnNoisyInput) {
    std::mt19937_64 rng(6);
    const auto      clean = synthesize(random_components(rng, 3, 200, 1e-3), 200, test_acquisition());
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto res = cadzow(add_noise(clean, 0.1, seed), 3, 15, 1e-12);
        ASSERT_EQ(res.rank_ratio.size(), res.iterations + 1);
        for (std::size_t i = 1; i < res.rank_ratio.size(); ++i) {
            EXPECT_LE(res.rank_ratio[i], res.rank_ratio[i - 1] * (1 + 1e-12)) << "seed " << seed << " pass " << i;
        }
        EXPECT_LT(res.rank_ratio.back(), res.rank_ratio.front());
        EXPECT_LE(hankel_ratio(res.fid, 3), hankel_ratio(add_noise(clean, 0.1, seed), 3));
    }
}

TEST(Cadzow, SinglePassMatchesOracle) {
    std::mt19937_64 rng(7);
    const std::size_t n = 41, k = 2;
    const Fid         fid(random_samples(rng, n), test_acquisition());
    const auto        res = cadzow(fid, k, 1, 1e-300);
    EXPECT_EQ(res.iterations, 1U);

    const auto                         dims = default_dims(n, k);
    const Eigen::MatrixXcd             h    = to_eigen(hankel(fid, dims));
    Eigen::JacobiSVD<Eigen::MatrixXcd> oracle(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXcd             vk   = oracle.matrixV().leftCols(static_cast<Eigen::Index>(k));
    const Eigen::MatrixXcd             low  = h * vk * vk.adjoint();
    for (std::size_t s = 0; s < n; ++s) {
        Complex sum{};
        double  count = 0;
        for (std::size_t i = 0; i < dims.l; ++i) {
            if (s >= i && s - i < dims.m) {
                sum += low(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s - i));
                count += 1;
            }
        }
        EXPECT_LE(std::abs(res.fid[s] - sum / count), 1e-12 * max_abs(fid.samples())) << s;
    }
}

TEST(Cadzow, RejectsBadArguments) {
    const Fid fid(std::vector<Complex>(32, 1), test_acquisition());
    EXPECT_THROW((void)cadzow(fid, 0, 5, 1e-6), InvalidInput);
    EXPECT_THROW((void)cadzow(fid, 2, 0, 1e-6), InvalidInput);
    EXPECT_THROW((void)cadzow(fid, 2, 5, 0), InvalidInput);
    EXPECT_THROW((void)cadzow(fid, 20, 5, 1e-6), InvalidInput);
}

TEST(Cadzow, IterationCapIsNotAnError) {
    const auto res = cadzow(add_noise(synthesize(metabolites(), 256, test_acquisition()), 0.2, 4), 3, 2, 1e-300);
    EXPECT_EQ(res.iterations, 2U);
    EXPECT_FALSE(res.converged);
}

TEST(PhaseCorrect, ZeroIsIdentity) {
    std::mt19937_64 rng(8);
    const Fid       fid(random_samples(rng, 64), test_acquisition());
    EXPECT_EQ(phase_correct(fid, 0.0), fid);
}

TEST(PhaseCorrect, PiNegates) {
    std::mt19937_64 rng(9);
    const Fid       fid(random_samples(rng, 64), test_acquisition());
    const auto      out = phase_correct(fid, std::numbers::pi);
    for (std::size_t n = 0; n < 64; ++n) {
        EXPECT_LE(std::abs(out[n] + fid[n]), 1e-15 * std::abs(fid[n]) + 1e-300);
    }
}

TEST(PhaseCorrect, PreservesMagnitudes) {
    std::mt19937_64 rng(10);
    const Fid       fid(random_samples(rng, 512), test_acquisition());
    const auto      out = phase_correct(fid, 1.234);
    for (std::size_t n = 0; n < fid.size(); ++n) {
        // a unit-modulus multiplication changes |s| by at most a few ulp
        EXPECT_LE(std::abs(std::abs(out[n]) - std::abs(fid[n])), 4 * std::numeric_limits<double>::epsilon() * std::abs(fid[n]));
    }
    const auto a = to_spectrum(fid);
    const auto b = to_spectrum(out);
    double     scale = 0;
    for (const auto& v : a.bins) {
        scale = std::max(scale, std::abs(v));
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_LE(std::abs(std::abs(a.bins[i]) - std::abs(b.bins[i])), 1e-12 * scale);
    }
}

TEST(PhaseCorrect, ShiftsFittedPhases) {
    const std::vector<HarmonicComponent> truth{{1.0, -10, -150, 0.2}, {0.7, -20, 60, -1.0}, {1.2, -6, 230, 2.8}};
    const auto                           fid = synthesize(truth, 256, test_acquisition());
    const double                         phi = 0.9;
    const auto                           a   = decompose(fid, 3);
    const auto                           b   = decompose(phase_correct(fid, phi), 3);
    const auto                           matched = match_by_frequency(a.components, b.components);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_LE(phase_error(matched[i]->phase, a.components[i].phase + phi), 1e-9);
    }
}

TEST(AutoPhase, RecoversNaaPhase) {
    auto comps     = metabolites();
    comps[0].phase = 0.4;
    const auto fid = synthesize(comps, 1024, phantom_acq);
    EXPECT_NEAR(auto_phase(fid, PpmBand(2.01, 0.1), 3), -0.4, 1e-6);
    EXPECT_NEAR(auto_phase(fid, PpmBand(2.01, 0.1)), -0.4, 1e-6);
}

TEST(AutoPhase, AbsorptiveSignalNeedsNoRotation) {
    const auto fid = synthesize(metabolites(), 1024, phantom_acq);
    EXPECT_NEAR(auto_phase(fid, PpmBand(2.01, 0.1), 3), 0.0, 1e-8);
}

TEST(AutoPhase, CorrectionIsIdempotent) {
    auto comps     = metabolites();
    comps[0].phase = -2.5;
    comps[1].phase = 1.0;
    const auto    fid  = add_noise(synthesize(comps, 1024, phantom_acq), 0.01, 3);
    const PpmBand band(2.01, 0.1);
    const auto    fixed = phase_correct(fid, auto_phase(fid, band));
    EXPECT_NEAR(auto_phase(fixed, band), 0.0, 1e-6);
}

TEST(AutoPhase, PicksLargestInBand) {
    const std::vector<HarmonicComponent> comps{{0.5, -8, ppm_to_hz(2.05, phantom_acq), 1.0}, {1.0, -8, ppm_to_hz(1.95, phantom_acq), -0.3}, {5.0, -8, ppm_to_hz(3.0, phantom_acq), 2.0}};
    const auto                           fid = synthesize(comps, 1024, phantom_acq);
    EXPECT_NEAR(auto_phase(fid, PpmBand(2.0, 0.1), 3), 0.3, 1e-6);
}

TEST(AutoPhase, RejectsEmptyBandNamingIt) {
    const auto fid = synthesize(metabolites(), 512, phantom_acq);
    try {
        (void)auto_phase(fid, PpmBand(0.5, 0.1), 3);
        FAIL();
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos) << e.what();
    }
}

TEST(Baseline, FlatOffsetCancels) {
    const auto fid    = synthesize(std::vector<HarmonicComponent>{{1, -30, 100, 0}}, 256, test_acquisition());
    const auto spec   = to_spectrum(fid);
    auto       offset = spec;
    for (auto& b : offset.bins) {
        b += 5.0;
    }
    for (auto mode : {BaselineSmoothing::linear, BaselineSmoothing::cubic}) {
        const BaselineAnchors anchors{{0, 40, 200, spec.size() - 1}, mode};
        const auto            plain   = baseline_correct(spec, anchors);
        const auto            shifted = baseline_correct(offset, anchors);
        for (std::size_t i = 0; i < spec.size(); ++i) {
            EXPECT_NEAR(shifted.bins[i].real(), plain.bins[i].real(), 1e-12);
            EXPECT_EQ(shifted.bins[i].imag(), offset.bins[i].imag());
        }
    }
}

TEST(Baseline, ZeroSpectrumStaysZero) {
    const auto spec = to_spectrum(Fid(std::vector<Complex>(64), test_acquisition()));
    for (auto mode : {BaselineSmoothing::linear, BaselineSmoothing::cubic}) {
        const auto out = baseline_correct(spec, BaselineAnchors{{3, 20, 40, 60}, mode});
        for (const auto& b : out.bins) {
            EXPECT_EQ(b, Complex{});
        }
    }
}

TEST(Baseline, RecoversInjectedCubic) {
    // two narrow Gaussian lines that are negligible at every anchor
    auto       spec = to_spectrum(Fid(std::vector<Complex>(512), test_acquisition()));
    const auto n    = static_cast<double>(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double d1 = (static_cast<double>(i) - 100.0) / 3.0;
        const double d2 = (static_cast<double>(i) - 290.0) / 3.0;
        spec.bins[i]    = Complex(40.0 * std::exp(-0.5 * d1 * d1) + 25.0 * std::exp(-0.5 * d2 * d2), 0.0);
    }
    const auto baseline = [&](std::size_t i) {
        const double x = static_cast<double>(i) / n;
        return 3.0 - 8.0 * x + 12.0 * x * x - 5.0 * x * x * x;
    };
    std::vector<double> injected(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        injected[i] = baseline(i);
        spec.bins[i] += injected[i];
    }
    const BaselineAnchors anchors{{0, 64, 128, 192, 256, 320, 384, 448, 511}, BaselineSmoothing::cubic};
    const auto            curve = baseline_curve(spec, anchors);
    const auto            out   = baseline_correct(spec, anchors);
    for (auto idx : anchors.indices) {
        EXPECT_NEAR(curve[idx], spec.bins[idx].real(), 1e-12);
        EXPECT_LE(std::abs(out.bins[idx].real()), 1e-9);
    }
    const double range = *std::max_element(injected.begin(), injected.end()) - *std::min_element(injected.begin(), injected.end());
    double       worst = 0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        worst = std::max(worst, std::abs(curve[i] - injected[i]));
    }
    EXPECT_LE(worst, 0.05 * range);
}

TEST(Baseline, AnchorsVanishAfterCorrection) {
    std::mt19937_64 rng(15);
    const auto      spec = to_spectrum(Fid(random_samples(rng, 300), test_acquisition()));
    for (auto mode : {BaselineSmoothing::linear, BaselineSmoothing::cubic}) {
        const BaselineAnchors anchors{{2, 50, 51, 200, 333, 500}, mode};
        const auto            out = baseline_correct(spec, anchors);
        for (auto idx : anchors.indices) {
            EXPECT_LE(std::abs(out.bins[idx].real()), 1e-9);
        }
    }
}

TEST(Baseline, RejectsInvalidAnchors) {
    const auto spec = to_spectrum(Fid(std::vector<Complex>(64), test_acquisition()));
    EXPECT_THROW((void)baseline_correct(spec, BaselineAnchors{{5}, BaselineSmoothing::linear}), InvalidInput);
    EXPECT_THROW((void)baseline_correct(spec, BaselineAnchors{{5, 5}, BaselineSmoothing::linear}), InvalidInput);
    EXPECT_THROW((void)baseline_correct(spec, BaselineAnchors{{9, 5}, BaselineSmoothing::linear}), InvalidInput);
    EXPECT_THROW((void)baseline_correct(spec, BaselineAnchors{{5, 64}, BaselineSmoothing::cubic}), InvalidInput);
}

TEST(Eddy, RealPositiveReferenceIsIdentity) {
    std::mt19937_64      rng(16);
    const Fid            fid(random_samples(rng, 128), test_acquisition());
    std::vector<Complex> ref(128);
    for (std::size_t n = 0; n < 128; ++n) {
        ref[n] = 1.0 + static_cast<double>(n);
    }
    const auto res = eddy_correct(fid, fid.with_samples(ref));
    EXPECT_EQ(res.fid, fid);
    EXPECT_EQ(res.patched, 0U);
}

TEST(Eddy, SharedRampIsRemoved) {
    const auto           acq   = phantom_acq;
    const auto           truth = synthesize(metabolites(), 1024, acq);
    const auto           water = synthesize(std::vector<HarmonicComponent>{{100, -5, 0, 0}}, 1024, acq);
    std::vector<Complex> s(1024), w(1024);
    for (std::size_t n = 0; n < 1024; ++n) {
        const double t     = static_cast<double>(n) * acq.dwell_time;
        const auto   ramp  = std::polar(1.0, 0.4 + 6.0 * t - 4.0 * t * t);
        s[n]               = truth[n] * ramp;
        w[n]               = water[n] * ramp;
    }
    const auto res = eddy_correct(truth.with_samples(s), water.with_samples(w));
    EXPECT_LE(std::sqrt(distance_energy(res.fid.samples(), truth.samples()) / truth.energy()), 1e-9);
    for (std::size_t n = 0; n < 1024; ++n) {
        EXPECT_LE(std::abs(std::abs(res.fid[n]) - std::abs(s[n])), 4 * std::numeric_limits<double>::epsilon() * std::abs(s[n]));
    }
}

TEST(Eddy, ZeroReferenceSamplesBorrowNeighborPhase) {
    std::vector<Complex> sig(6, Complex{1, 0});
    std::vector<Complex> ref{0, std::polar(2.0, 0.5), 0, 0, std::polar(1.0, -1.0), 0};
    const auto           acq = test_acquisition();
    const auto           res = eddy_correct(Fid(sig, acq), Fid(ref, acq));
    EXPECT_EQ(res.patched, 4U);
    const std::vector<double> expected{-0.5, -0.5, -0.5, 1.0, 1.0, 1.0};
    for (std::size_t n = 0; n < 6; ++n) {
        EXPECT_NEAR(std::arg(res.fid[n]), expected[n], 1e-15) << n;
    }
}

TEST(Eddy, RejectsMismatches) {
    const auto acq = test_acquisition();
    EXPECT_THROW((void)eddy_correct(Fid(std::vector<Complex>(8, 1), acq), Fid(std::vector<Complex>(9, 1), acq)), InvalidInput);
    EXPECT_THROW((void)eddy_correct(Fid(std::vector<Complex>(8, 1), acq), Fid(std::vector<Complex>(8, 1), test_acquisition(2e-3))), InvalidInput);
    EXPECT_THROW((void)eddy_correct(Fid(std::vector<Complex>(8, 1), acq), Fid(std::vector<Complex>(8), acq)), InvalidInput);
}

TEST(Water, RemovesTripletAndKeepsMetabolites) {
    auto all = metabolites();
    for (const auto& w : water_triplet()) {
        all.push_back(w);
    }
    const auto    fid  = synthesize(all, 2048, phantom_acq);
    const PpmBand band = default_water_band();
    const auto    res  = remove_water(fid, band, 6);
    EXPECT_EQ(res.removed.size(), 3U);

    const double before = band_energy(to_spectrum(fid), band);
    const double after  = band_energy(to_spectrum(res.fid), band);
    // the metabolites leave a tail in the band; compare against the water-free oracle
    const double floor  = band_energy(to_spectrum(synthesize(metabolites(), 2048, phantom_acq)), band);
    EXPECT_LE(std::abs(after - floor), 1e-4 * before);

    const auto refit = decompose(res.fid, 3);
    const auto err   = recovery_error(metabolites(), refit.components);
    EXPECT_LE(err.worst_relative(), 1e-5);
    EXPECT_LE(err.phase, 1e-5);
}

TEST(Water, EmptyBandLeavesInputUnchanged) {
    const auto fid = synthesize(metabolites(), 512, phantom_acq);
    const auto res = remove_water(fid, PpmBand(8.0, 0.2), 3);
    EXPECT_TRUE(res.removed.empty());
    EXPECT_EQ(res.fid, fid);
}

TEST(Water, OutputIsInputMinusRemoved) {
    auto all = metabolites();
    for (const auto& w : water_triplet()) {
        all.push_back(w);
    }
    const auto fid   = add_noise(synthesize(all, 1024, phantom_acq), 0.01, 5);
    const auto res   = remove_water(fid, default_water_band(), 12);
    const auto water = synthesize(res.removed, fid.size(), phantom_acq);
    for (std::size_t n = 0; n < fid.size(); ++n) {
        EXPECT_EQ(res.fid[n], fid[n] - water[n]);
    }
}

TEST(Water, IdempotentOnNoiselessInput) {
    auto all = metabolites();
    for (const auto& w : water_triplet()) {
        all.push_back(w);
    }
    const auto fid  = synthesize(all, 1024, phantom_acq);
    const auto once = remove_water(fid, default_water_band(), 6).fid;
    const auto twice = remove_water(once, default_water_band(), 6).fid;
    EXPECT_LE(std::sqrt(distance_energy(twice.samples(), once.samples()) / once.energy()), 1e-8);
}
