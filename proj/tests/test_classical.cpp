#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "qbm/classical.hpp"

using namespace qbm;
using std::numbers::pi;

namespace {

PhaseSpaceState packet(double x0 = 0.0, double p0 = 0.0) {
    return make_phase_space_gaussian(96, 96, 7.0, 7.0, x0, p0, 0.5, 0.5);
}

}  // namespace

TEST(PhaseSpace, GaussianIsNormalizedWithRequestedMoments) {
    const auto s = make_phase_space_gaussian(128, 128, 8.0, 8.0, 0.5, -0.3, 0.6, 0.4);
    EXPECT_NEAR(s.norm(), 1.0, 1e-12);
    const auto o = phase_space_observables(s, {}, 1.0);
    EXPECT_NEAR(o.xx, 0.6 + 0.25, 1e-9);
    EXPECT_NEAR(o.pp, 0.4 + 0.09, 1e-9);
    EXPECT_NEAR(o.xp, -0.15, 1e-9);
    EXPECT_THROW(make_phase_space_gaussian(4, 128, 8, 8, 0, 0, 1, 1), DomainError);
}

TEST(PhaseSpace, ClassicalCopyOfQuantumState) {
    InitialState q{SymmetricSuperposition{1.5, 0.0}, {}};
    const auto s = make_phase_space_state(q, 128, 128, 9.0, 9.0);
    const auto o = phase_space_observables(s, {}, 1.0);
    const auto m = initial_moments(q);
    EXPECT_NEAR(o.xx, m.xx, 1e-5 * m.xx);
    EXPECT_NEAR(o.pp, m.pp, 1e-5 * m.pp);
}

TEST(ClassicalMoments, StationaryEquipartition) {
    // pp → d_pp/(2γ), xx → pp/(M²Ω²)
    const OscillatorSpec sys{2.0, 1.5};
    const double g = 0.3, dpp = 0.6;
    const auto m = integrate_classical_moments(MomentState{1.0, 1.0}, sys, g, dpp, 60.0, 1e-2).back();
    EXPECT_NEAR(m.pp, dpp / (2 * g), 1e-7);
    EXPECT_NEAR(m.xx, dpp / (2 * g) / (4.0 * 2.25), 1e-7);
    EXPECT_NEAR(m.xp, 0.0, 1e-7);
}

TEST(ClassicalMoments, FrictionlessOrbit) {
    const OscillatorSpec sys{1.0, 2.0};
    MomentState m0;
    m0.mean_x = 1.0;
    const auto m = integrate_classical_moments(m0, sys, 0.0, 0.0, 3.0, 1e-3).back();
    EXPECT_NEAR(m.mean_x, std::cos(6.0), 1e-10);
    EXPECT_NEAR(m.mean_p, -2.0 * std::sin(6.0), 1e-10);
}

TEST(FokkerPlanck, ConservesNormAndPositivity) {
    const auto w0 = packet(1.0);
    const auto run = evolve_fokker_planck(w0, {}, 0.05, 0.1, 2.0, 0.01);
    EXPECT_NEAR(run.final_state.norm(), 1.0, 1e-6);
    EXPECT_GT(run.final_state.min_value(), -1e-6);
}

TEST(FokkerPlanck, MomentsFollowTheMomentEquations) {
    const OscillatorSpec sys{};
    const double g = 0.05, dpp = 0.1, T = 3.0;
    const auto w0 = packet(1.0, 0.5);
    FokkerPlanckOptions opt;
    opt.record_every = 10;
    const auto run = evolve_fokker_planck(w0, sys, g, dpp, T, 0.01, opt);
    MomentState m0{0.5 + 1.0, 0.5 + 0.25, 0.5, 1.0, 0.5};
    const auto m = integrate_classical_moments(m0, sys, g, dpp, T, 1e-3).back();
    const auto& o = run.observables.back();
    EXPECT_NEAR(o.xx, m.xx, 0.01 * m.xx);
    EXPECT_NEAR(o.pp, m.pp, 0.01 * m.pp);
    EXPECT_NEAR(o.xp, m.xp, 0.01 * std::sqrt(m.xx * m.pp));
}

TEST(FokkerPlanck, InitialHeatingRate) {
    // dE/dt at t = 0 equals d_pp/M − 2γ⟨p²⟩/M.
    const OscillatorSpec sys{};
    const double g = 0.01, kT = 20.0, dpp = 2 * g * kT;
    const auto w0 = packet();
    const double dt = 0.005;
    const auto run = evolve_fokker_planck(w0, sys, g, dpp, 10 * dt, dt);
    const double slope = (run.observables[1].energy - run.observables[0].energy) / dt;
    EXPECT_NEAR(slope, dpp - 2 * g * 0.5, 0.02 * dpp);
}

TEST(FokkerPlanck, CrossDiffusionMatchesAnomalousMomentTerm) {
    // −f∂²ₓₚW shifts d⟨xp⟩/dt by −f, like the quantum moment equation.
    const OscillatorSpec sys{};
    const double g = 0.05, D = 0.1, f = 0.03, T = 2.0;
    const auto series = CoefficientSeries::constant(EnvironmentSpec{1.0, g, 1e3}, sys, T, {0.0, g, D, f});
    FokkerPlanckOptions opt;
    opt.anomalous = true;
    const auto run = evolve_fokker_planck(packet(), series, T, 0.01, opt);
    MomentOptions mo;
    mo.perturbative_slack = 0.0;
    mo.refine_jolt = false;
    MomentState m0{0.5, 0.5, 0.0};
    const auto m = evolve_moments(m0, series, T, 1e-3, mo).back();
    EXPECT_NEAR(run.observables.back().xp, m.xp, 1e-3);
    EXPECT_NEAR(run.observables.back().xx, m.xx, 2e-3 * m.xx);
}

TEST(FokkerPlanck, ZeroTemperatureClassicalBathOnlyDamps) {
    const auto env = EnvironmentSpec::ohmic(0.05, 100.0);
    const auto c = classical_zero_temperature(env, {});
    EXPECT_EQ(c.d_pp, 0.0);
    const auto run = evolve_fokker_planck(packet(2.0), {}, c.gamma, c.d_pp, 5.0, 0.01);
    for (std::size_t k = 1; k < run.observables.size(); ++k)
        EXPECT_LE(run.observables[k].energy, run.observables[k - 1].energy + 1e-12);
}

TEST(FokkerPlanck, RejectsUnstableStep) {
    EXPECT_THROW(evolve_fokker_planck(packet(), {}, 0.05, 5.0, 1.0, 0.5), StabilityError);
    EXPECT_THROW(evolve_fokker_planck(packet(), {}, 0.05, -1.0, 1.0, 0.01), DomainError);
}
