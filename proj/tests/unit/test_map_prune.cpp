#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "besovtree/brute_force.hpp"
#include "besovtree/errors.hpp"
#include "besovtree/map_prune.hpp"
#include "helpers.hpp"

using namespace besovtree;

namespace {

// Depth-1 1D pyramid with root coefficient `root` and bottom row {m0, m1}.
Pyramid two_leaf(double root, double m0, double m1) {
    auto p = Pyramid::zeros(1, 1);
    p.at(0, 0, 0) = root;
    p.at(1, 0, 0) = m0;
    p.at(1, 0, 1) = m1;
    return p;
}

// Row cost L + R written out directly from the Bernoulli and hyperprior densities.
double row_cost(const std::vector<double>& kept, const std::vector<double>& pruned, const std::vector<bool>& in,
                double beta, double a) {
    double c = 0.0;
    for (std::size_t k = 0; k < kept.size(); ++k) {
        c += in[k] ? kept[k] - std::log(beta) : pruned[k] - std::log(1.0 - beta);
        c += -a * std::log(0.5 - beta);
    }
    return c;
}

void check_invariants(const Pyramid& p, const PruneResult& r) {
    CHECK(validate_proper(r.mask));
    CHECK(r.mask.get(0, 0));
    for (int j = 0; j <= p.depth; ++j) {
        for (std::size_t k = 0; k < p.level_size(j); ++k) {
            if (r.mask.get(j, k)) continue;
            for (int b = 0; b < p.bands(); ++b) CHECK(r.coefficients.at(j, b, k) == 0.0);
        }
    }
    if (r.beta_hat) {
        for (double b : *r.beta_hat) CHECK((b >= 0.0 && b < 0.5));
    }
}

}  // namespace

TEST_CASE("log-odds helpers") {
    CHECK(beta_to_log_odds(0.5) == 0.0);
    CHECK(std::isinf(beta_to_log_odds(0.0)));
    CHECK(log_odds_to_beta(std::log(9.0)) == doctest::Approx(0.1));
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(softplus(800.0) == doctest::Approx(800.0));
    CHECK(softplus(-800.0) >= 0.0);
    CHECK(hyperprior_penalty(std::log(3.0), 2.0) == doctest::Approx(-2.0 * std::log(0.25)));
}

TEST_CASE("fixed beta, gaussian bottom rule") {
    // beta = 0.5: threshold m^2 >= 4 log 1 = 0, every nonzero node survives
    std::mt19937_64 rng(1);
    auto p = testutil::random_pyramid(1, 3, rng);
    const auto half = prune_fixed_beta(p, BetaSchedule::uniform(0.5), BaseDensity::gaussian());
    CHECK(half.mask == TreeMask::full(1, 3));

    // beta = 0.1: keep iff m^2 >= 4 log 9
    CHECK(4.0 * std::log(9.0) == doctest::Approx(8.7889).epsilon(1e-4));
    const auto r = prune_fixed_beta(two_leaf(50.0, 3.0, 2.0), BetaSchedule::uniform(0.1), BaseDensity::gaussian());
    CHECK(r.mask.get(1, 0));
    CHECK_FALSE(r.mask.get(1, 1));
    CHECK(r.coefficients.at(1, 0, 0) == 3.0);
    CHECK(r.coefficients.at(1, 0, 1) == 0.0);
    check_invariants(two_leaf(50.0, 3.0, 2.0), r);
}

TEST_CASE("fixed beta, laplace bottom rule") {
    // beta = 0.5 would leave a zero gap, which the tie rule keeps
    const auto small = prune_fixed_beta(two_leaf(50.0, 0.8, -0.8), BetaSchedule::uniform(0.49), BaseDensity::laplace(1.0));
    CHECK_FALSE(small.mask.get(1, 0));
    CHECK_FALSE(small.mask.get(1, 1));

    // gap at m = 2, kappa = 1 is 1/2; beta = 0.4 >= 1 / (1 + e^0.5)
    CHECK(1.0 / (1.0 + std::exp(0.5)) == doctest::Approx(0.3775).epsilon(1e-4));
    const auto r = prune_fixed_beta(two_leaf(50.0, 2.0, 0.0), BetaSchedule::uniform(0.4), BaseDensity::laplace(1.0));
    CHECK(r.mask.get(1, 0));
    CHECK(r.coefficients.at(1, 0, 0) == doctest::Approx(1.0));
    const auto r2 = prune_fixed_beta(two_leaf(50.0, 2.0, 0.0), BetaSchedule::uniform(0.37), BaseDensity::laplace(1.0));
    CHECK_FALSE(r2.mask.get(1, 0));
}

TEST_CASE("fixed beta validation") {
    const auto p = Pyramid::zeros(1, 2);
    CHECK_THROWS_AS(prune_fixed_beta(p, BetaSchedule::uniform(0.0), BaseDensity::gaussian()), ParameterError);
    CHECK_THROWS_AS(prune_fixed_beta(p, BetaSchedule::uniform(0.6), BaseDensity::gaussian()), ParameterError);
    CHECK_THROWS_AS(prune_fixed_beta(p, BetaSchedule{{0.1, 0.2, 0.3}}, BaseDensity::gaussian()), ParameterError);
    CHECK_THROWS_AS(prune_fixed_beta(p, BetaSchedule::uniform(0.1), BaseDensity::laplace(-1.0)), ParameterError);
    CHECK_THROWS_AS(prune_fixed_beta(p, BetaSchedule::uniform(0.1), BaseDensity::gaussian(), 0.0), ParameterError);
    CHECK_NOTHROW(prune_fixed_beta(p, BetaSchedule{{0.1, 0.2}}, BaseDensity::gaussian()));
}

TEST_CASE("automatic gaussian on zero data") {
    for (int dim : {1, 2}) {
        const auto p = Pyramid::zeros(dim, 3);
        const auto r = auto_prune_gaussian(p, {100.0});
        CHECK(r.mask == TreeMask::root_only(dim, 3));
        REQUIRE(r.beta_hat);
        for (double b : *r.beta_hat) CHECK(b == 0.0);
        CHECK(pyramid_energy(r.coefficients) == 0.0);
    }
}

TEST_CASE("automatic gaussian two-node grid") {
    const std::vector<double> kept{9.0 / 4, 0.01 / 4}, pruned{9.0 / 2, 0.01 / 2};
    const double b1 = 1.0 / (1.0 + std::exp(9.0 / 4)), b2 = 1.0 / (1.0 + std::exp(0.01 / 4));
    CHECK(b1 == doctest::Approx(0.09535).epsilon(1e-4));
    CHECK(b2 == doctest::Approx(0.49938).epsilon(1e-5));

    for (double a : {0.0, 1.0}) {
        const auto r = auto_prune_gaussian(two_leaf(50.0, 3.0, 0.1), {a});
        REQUIRE(r.diagnostics.size() == 1);
        const auto& d = r.diagnostics[0];
        REQUIRE(d.level == 1);
        REQUIRE(d.candidates.size() == 3);
        const double expect[3] = {row_cost(kept, pruned, {false, false}, 0.0, a),
                                  row_cost(kept, pruned, {true, false}, b1, a),
                                  row_cost(kept, pruned, {true, true}, b2, a)};
        const double betas[3] = {0.0, b1, b2};
        for (int c = 0; c < 3; ++c) {
            CHECK(d.candidates[c].beta == doctest::Approx(betas[c]).epsilon(1e-12));
            CHECK(d.candidates[c].cost == doctest::Approx(expect[c]).epsilon(1e-12));
        }
        if (a == 0.0) {
            CHECK(expect[0] == doctest::Approx(4.5050).epsilon(1e-4));
            CHECK(expect[1] == doctest::Approx(4.7054).epsilon(1e-4));
            CHECK(expect[2] == doctest::Approx(3.6413).epsilon(1e-4));
            CHECK(d.chosen_index == 2);
            CHECK(r.mask.get(1, 0));
            CHECK(r.mask.get(1, 1));
            CHECK((*r.beta_hat)[0] == doctest::Approx(0.49938).epsilon(1e-5));
        } else {
            CHECK(expect[0] == doctest::Approx(5.8913).epsilon(1e-4));
            CHECK(expect[1] == doctest::Approx(6.5148).epsilon(1e-4));
            // 18.416 is what the rounded beta 0.49938 gives; the unrounded one gives 18.397
            CHECK(expect[2] == doctest::Approx(18.397).epsilon(1e-4));
            CHECK(d.chosen_index == 0);
            CHECK((*r.beta_hat)[0] == 0.0);
            CHECK_FALSE(r.mask.get(1, 0));
        }
    }
}

TEST_CASE("single spike keeps its root path") {
    auto p = Pyramid::zeros(1, 3);
    p.at(3, 0, 5) = 10.0;
    const auto r = auto_prune_gaussian(p, {0.0});
    TreeMask path = TreeMask::root_only(1, 3);
    path.set(1, 1, true);
    path.set(2, 2, true);
    path.set(3, 5, true);
    CHECK(r.mask == path);
    const auto oracle = oracle::brute_force_map(p, BaseDensity::gaussian(), Hyperprior{0.0});
    CHECK(oracle.mask == r.mask);
    CHECK(oracle.total_cost == doctest::Approx(r.total_cost).epsilon(1e-12));
}

TEST_CASE("automatic laplace") {
    // bottom row below 1/kappa: only the beta = 0 candidate, row pruned
    const auto small = auto_prune_laplace(two_leaf(50.0, 0.9, -0.4), {5.0}, 1.0);
    CHECK(small.diagnostics[0].candidates.size() == 1);
    CHECK((*small.beta_hat)[0] == 0.0);
    CHECK_FALSE(small.mask.get(1, 0));
    CHECK_FALSE(small.mask.get(1, 1));

    // m = 2 gives gap 1/2, m = 0.5 gives none
    const std::vector<double> kept{1.5, 0.125}, pruned{2.0, 0.125};
    const double b1 = 1.0 / (1.0 + std::exp(0.5));
    for (double a : {0.5, 1.0, 4.0}) {
        const auto r = auto_prune_laplace(two_leaf(50.0, 2.0, 0.5), {a}, 1.0);
        const auto& cands = r.diagnostics[0].candidates;
        REQUIRE(cands.size() == 2);
        CHECK(cands[1].beta == doctest::Approx(0.37754).epsilon(1e-5));
        const double c0 = row_cost(kept, pruned, {false, false}, 0.0, a);
        const double c1 = row_cost(kept, pruned, {true, false}, b1, a);
        CHECK(cands[0].cost == doctest::Approx(c0).epsilon(1e-12));
        CHECK(cands[1].cost == doctest::Approx(c1).epsilon(1e-12));
        CHECK(r.diagnostics[0].chosen_index == (c1 < c0 ? 1u : 0u));
    }
}

TEST_CASE("laplace with huge kappa approaches gaussian pruning of sqrt(2) m") {
    // Laplace gap tends to m^2/2 while the unit Gaussian gap is m^2/4.
    std::mt19937_64 rng(17);
    int agree = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        auto p = testutil::random_pyramid(t % 2 ? 2 : 1, 3, rng);
        const auto lap = auto_prune_laplace(p, {10.0}, 1e6);
        auto scaled = axpby(std::sqrt(2.0), p, 0.0, p);
        const auto gau = auto_prune_gaussian(scaled, {10.0});
        if (lap.mask == gau.mask) {
            ++agree;
            continue;
        }
        // A node sitting on its own grid point costs the same kept or pruned (up to
        // e^-gap), so rounding may pick either; then both masks must score alike up to
        // the O(1/kappa) shift of the Laplace gaps.
        const double alt = oracle::map_objective(scaled, lap.mask, BaseDensity::gaussian(), lap.level_log_odds,
                                                 Hyperprior{10.0});
        CHECK(alt == doctest::Approx(gau.total_cost).epsilon(1e-6));
    }
    CHECK(agree >= trials - 2);
}

TEST_CASE("level selection edge cases") {
    const std::vector<double> neg{-1.0, 0.0, -3.0}, w{1.0, 1.0, 1.0};
    const auto none = level_beta_select(neg, w, w, 1, {2.0});
    CHECK(none.beta == 0.0);
    CHECK(none.included.empty());

    // one node, D = 4, kept 1, pruned 5
    const std::vector<double> gap{4.0}, kept{1.0}, pruned{5.0};
    const auto sel = level_beta_select(gap, kept, pruned, 1, {0.0});
    REQUIRE(sel.candidates.size() == 2);
    const double b1 = 1.0 / (1.0 + std::exp(4.0));
    const double cost0 = 5.0;
    const double cost1 = 1.0 + std::log((1 - b1) / b1) - std::log(1 - b1);
    CHECK(sel.candidates[0].cost == doctest::Approx(cost0));
    CHECK(sel.candidates[1].cost == doctest::Approx(cost1).epsilon(1e-12));
    CHECK(sel.chosen == (cost1 < cost0 ? 1u : 0u));

    CHECK_THROWS_AS(level_beta_select(gap, std::vector<double>{}, pruned, 1, {0.0}), DimensionError);
    CHECK_THROWS_AS(level_beta_select(gap, kept, pruned, 1, {-1.0}), ParameterError);
}

TEST_CASE("stopping at the first cost increase finds the argmin over the data grid") {
    // Bottom-row Gaussian setting: gaps m^2/4, grid points only (beta = 0 is not part of
    // the scan, and a > 0 so there is no clamp point).
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double as[] = {0.5, 1.0, 10.0, 100.0};
    int agree = 0, total = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(u(rng) * 62);
        std::vector<double> gaps(n), kept(n), pruned(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double m = u(rng) < 0.2 ? 6.0 * n01(rng) : n01(rng);
            kept[k] = m * m / 4;
            pruned[k] = m * m / 2;
            gaps[k] = pruned[k] - kept[k];
        }
        const auto sel = level_beta_select(gaps, kept, pruned, 1, {as[t % 4]});
        const auto& c = sel.candidates;
        if (c.size() < 2) continue;
        std::size_t stop = 1;
        while (stop + 1 < c.size() && c[stop + 1].cost < c[stop].cost) ++stop;
        std::size_t best = 1;
        for (std::size_t i = 2; i < c.size(); ++i) {
            if (c[i].cost < c[best].cost) best = i;
        }
        agree += stop == best;
        ++total;
    }
    MESSAGE("first-increase rule agreed on " << agree << " of " << total);
    CHECK(agree == total);
}

TEST_CASE("scaling identities") {
    CHECK(reduce_to_unit(0.3, 1.0, 1.0) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(rescale_beta(0.25, 2.0) == doctest::Approx(0.1).epsilon(1e-14));
    // kappa = 1 and sigma^2 the positive root of s^2 + s - 4 = 0 give c = 2
    const double sigma = std::sqrt((std::sqrt(17.0) - 1.0) / 2.0);
    CHECK(reduce_to_unit(0.25, sigma, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
    for (double c : {0.1, 1.0, 7.0}) CHECK(rescale_beta(0.5, c) == doctest::Approx(0.5));
}

TEST_CASE("general noise costs agree with unit pruning at the reduced beta") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        const auto p = testutil::random_pyramid(t % 2 ? 2 : 1, 3, rng);
        const double beta = 0.01 + 0.48 * u(rng), sigma = 0.3 + 2.0 * u(rng), kappa = 0.3 + 2.0 * u(rng);
        const auto general = prune_fixed_beta(p, BetaSchedule::uniform(beta), BaseDensity::gaussian(kappa), sigma);
        const auto unit = prune_fixed_beta(p, BetaSchedule::uniform(reduce_to_unit(beta, sigma, kappa)),
                                           BaseDensity::gaussian());
        CHECK(general.mask == unit.mask);
    }
}

TEST_CASE("scaling the data by c matches beta rescaled with exponent 1/c^2") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        const auto p = testutil::random_pyramid(1, 4, rng);
        const double beta = 0.01 + 0.48 * u(rng), c = 0.3 + 3.0 * u(rng);
        const auto lhs = prune_fixed_beta(axpby(c, p, 0.0, p), BetaSchedule::uniform(beta), BaseDensity::gaussian());
        const auto rhs = prune_fixed_beta(p, BetaSchedule::uniform(rescale_beta(beta, 1.0 / (c * c))),
                                          BaseDensity::gaussian());
        CHECK(lhs.mask == rhs.mask);
    }
}

TEST_CASE("oracle agreement on small trees") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        const int dim = t % 3 == 0 ? 2 : 1;
        const int depth = dim == 1 ? 3 : 1;
        const auto p = testutil::random_pyramid(dim, depth, rng);
        const double beta = 0.01 + 0.49 * u(rng);
        const auto density = t % 2 ? BaseDensity::laplace(0.5 + u(rng)) : BaseDensity::gaussian(0.5 + u(rng));
        const auto fast = prune_fixed_beta(p, BetaSchedule::uniform(beta), density);
        const auto slow = oracle::brute_force_map(p, density, BetaSchedule::uniform(beta));
        CHECK(fast.mask == slow.mask);
        CHECK(std::abs(fast.total_cost - slow.total_cost) <= 1e-9 * std::max(1.0, std::abs(slow.total_cost)));
        check_invariants(p, fast);
    }
    for (int t = 0; t < 10; ++t) {
        const auto p = testutil::random_pyramid(1, 2, rng);
        const double kappa = 0.5 + u(rng);
        const auto fast = auto_prune_laplace(p, {5.0}, kappa);
        const auto slow = oracle::brute_force_map(p, BaseDensity::laplace(kappa), Hyperprior{5.0});
        CHECK(fast.mask == slow.mask);
        check_invariants(p, fast);
    }
}

TEST_CASE("oracle on empty data pays only exclusion penalties") {
    const double beta = 0.1;
    const auto oracle_r = oracle::brute_force_map(Pyramid::zeros(1, 2), BaseDensity::gaussian(), BetaSchedule::uniform(beta));
    CHECK(oracle_r.mask == TreeMask::root_only(1, 2));
    CHECK(oracle_r.total_cost == doctest::Approx(-6.0 * std::log(1.0 - beta)).epsilon(1e-12));
}

TEST_CASE("oracle capacity limits") {
    CHECK_THROWS_AS(oracle::brute_force_map(Pyramid::zeros(1, 5), BaseDensity::gaussian(), BetaSchedule::uniform(0.1)),
                    CapacityError);
    CHECK_THROWS_AS(oracle::brute_force_map(Pyramid::zeros(2, 3), BaseDensity::gaussian(), Hyperprior{1.0}),
                    CapacityError);
}

TEST_CASE("noise estimate") {
    std::mt19937_64 rng(37);
    auto p = Pyramid::zeros(1, 12);
    std::normal_distribution<double> n(0.0, 2.0);
    for (double& v : p.details[12][0]) v = n(rng);
    CHECK(estimate_noise_sigma(p) == doctest::Approx(2.0).epsilon(0.05));
}
