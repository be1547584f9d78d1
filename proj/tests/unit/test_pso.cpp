#include <doctest.h>

#include <cmath>
#include <map>

#include "pmcast/errors.hpp"
#include "pmcast/pso.hpp"

using namespace pmcast;

namespace {

double sphere(const HyperVector& v) {
    double acc = 0.0;
    for (double c : v.coords) acc += (c - 0.5) * (c - 0.5);
    return acc;
}

// deterministic rugged objective (no state, no RNG)
double rugged(const HyperVector& v) {
    double acc = 0.0;
    for (int j = 0; j < v.size(); ++j)
        acc += std::sin(53.0 * v[j] + j) * 0.3 + (v[j] - 0.3) * (v[j] - 0.3);
    return acc;
}

std::string pos_key(const HyperVector& v) {
    std::string k;
    for (double c : v.coords) k += std::to_string(c) + "|";
    return k;
}

} // namespace

TEST_CASE("forced-draw velocity component follows the update rule and clamp") {
    // v=0, x=0, pbest=gbest=1, draws at their maxima (u1=1.5, u2=2.0)
    const double raw = raw_velocity_component(0.0, 0.0, 1.0, 1.0, 1.5, 2.0, 1.0);
    CHECK(raw == doctest::Approx(3.5));
    CHECK(clamp_velocity_component(raw, 1.0) == 1.0);
    CHECK(clamp_velocity_component(-raw, 1.0) == -1.0);
    CHECK(clamp_velocity_component(0.25, 1.0) == 0.25);
    CHECK(clamp_velocity_component(-0.25, 1.0) == -0.25);
}

TEST_CASE("zero acceleration or zero displacement leaves the velocity alone") {
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    Rng rng(3);

    Particle p;
    p.position = sample_uniform(space, rng);
    p.pbest = p.position;
    p.velocity.assign(7, 0.25);

    SUBCASE("phi1 = phi2 = 0") {
        PsoConfig zero = cfg;
        zero.phi1 = 0.0;
        zero.phi2 = 0.0;
        HyperVector gbest = sample_uniform(space, rng);
        velocity_update(p, gbest, zero, rng);
        for (double v : p.velocity) CHECK(v == 0.25);
    }
    SUBCASE("x = pbest = gbest") {
        velocity_update(p, p.position, cfg, rng);
        for (double v : p.velocity) CHECK(v == 0.25);
    }
}

TEST_CASE("position update adds the velocity and projects into the box") {
    Particle p;
    p.position.coords = {0.9, 0.2, 0.5, 0.0, 1.0, 0.3, 0.6};
    p.velocity = {0.4, 0.3, 0.0, -0.4, 0.4, -0.1, 0.0};
    position_update(p);
    CHECK(p.position[0] == 1.0); // clamped
    CHECK(p.position[1] == doctest::Approx(0.5));
    CHECK(p.position[2] == 0.5);
    CHECK(p.position[3] == 0.0); // clamped
    CHECK(p.position[4] == 1.0);
}

TEST_CASE("init_swarm evaluates each particle exactly once") {
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    cfg.n_particles = 10;
    int calls = 0;
    Rng rng(5);
    Swarm s = init_swarm(space, cfg, [&](const HyperVector& v) {
        ++calls;
        return sphere(v);
    }, rng);
    CHECK(calls == 10);
    CHECK(s.evaluations == 10);
    CHECK(s.particles.size() == 10);
    for (const auto& p : s.particles) {
        CHECK(p.pbest_score == sphere(p.position));
        for (double v : p.velocity) CHECK(v == 0.0);
        CHECK(s.gbest_score <= p.pbest_score);
    }
}

TEST_CASE("constant objective: gbest is the first particle's start") {
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    cfg.n_particles = 6;
    Rng rng(7);
    Swarm s = init_swarm(space, cfg, [](const HyperVector&) { return 2.5; }, rng);
    CHECK(s.gbest_score == 2.5);
    for (int j = 0; j < 7; ++j) CHECK(s.gbest[j] == s.particles.front().position[j]);
}

TEST_CASE("seeded init is reproducible") {
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    Rng a(99), b(99);
    Swarm s1 = init_swarm(space, cfg, sphere, a);
    Swarm s2 = init_swarm(space, cfg, sphere, b);
    for (int i = 0; i < cfg.n_particles; ++i)
        for (int j = 0; j < 7; ++j)
            CHECK(s1.particles[i].position[j] == s2.particles[i].position[j]);
    CHECK(s1.gbest_score == s2.gbest_score);
}

TEST_CASE("NaN objective at init names the particle") {
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    cfg.n_particles = 3;
    Rng rng(1);
    int n = 0;
    auto bad = [&](const HyperVector&) {
        return (n++ == 1) ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    };
    CHECK_THROWS_AS(init_swarm(space, cfg, bad, rng), NumericError);
}

TEST_CASE("plus-infinity is an accepted penalty score") {
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    cfg.n_particles = 4;
    cfg.generations = 2;
    cfg.seed = 3;
    int n = 0;
    auto sometimes_penalized = [&](const HyperVector& v) {
        return (n++ % 3 == 0) ? std::numeric_limits<double>::infinity() : sphere(v);
    };
    PsoResult r = optimize(space, cfg, sometimes_penalized);
    CHECK(std::isfinite(r.best_score));
}

TEST_CASE("optimize runs exactly n*(1+generations) evaluations without a cap") {
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    cfg.n_particles = 10;
    cfg.generations = 5;
    cfg.seed = 11;
    int calls = 0;
    PsoResult r = optimize(space, cfg, [&](const HyperVector& v) {
        ++calls;
        return rugged(v);
    });
    CHECK(calls == 60);
    CHECK(r.evaluations == 60);
    CHECK(r.trace.size() == 6);
}

TEST_CASE("zero generations degenerate to random search over the init") {
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    cfg.n_particles = 7;
    cfg.generations = 0;
    cfg.seed = 2;
    int calls = 0;
    PsoResult r = optimize(space, cfg, [&](const HyperVector& v) {
        ++calls;
        return sphere(v);
    });
    CHECK(calls == 7);
    CHECK(r.trace.size() == 1);
    CHECK(r.best_score == r.trace.front());
}

TEST_CASE("eval budget caps the run mid-generation") {
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    cfg.n_particles = 10;
    cfg.generations = 5;
    cfg.eval_budget = 25;
    cfg.seed = 4;
    int calls = 0;
    PsoResult r = optimize(space, cfg, [&](const HyperVector& v) {
        ++calls;
        return rugged(v);
    });
    CHECK(calls == 25);
    CHECK(r.evaluations == 25);

    cfg.eval_budget = 5; // below n_particles
    CHECK_THROWS_AS(optimize(space, cfg, rugged), ConfigError);
}

TEST_CASE("every evaluated position stays inside the box") {
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    cfg.n_particles = 8;
    cfg.generations = 12;
    cfg.seed = 21;
    optimize(space, cfg, [&](const HyperVector& v) {
        for (double c : v.coords) {
            REQUIRE(c >= 0.0);
            REQUIRE(c <= 1.0);
        }
        return rugged(v);
    });
}

TEST_CASE("gbest trace is the running minimum of everything evaluated") {
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    cfg.n_particles = 10;
    cfg.generations = 8;
    cfg.seed = 33;

    std::vector<double> seen;
    std::map<std::string, double> memo;
    PsoResult r = optimize(space, cfg, [&](const HyperVector& v) {
        const double score = rugged(v);
        memo[pos_key(v)] = score;
        seen.push_back(score);
        return score;
    });

    // non-increasing
    for (std::size_t g = 1; g < r.trace.size(); ++g) CHECK(r.trace[g] <= r.trace[g - 1]);
    // each trace entry equals the min over evaluations so far
    double running = std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
    for (std::size_t g = 0; g < r.trace.size(); ++g) {
        const std::size_t upto = 10 * (g + 1);
        for (; idx < upto && idx < seen.size(); ++idx) running = std::min(running, seen[idx]);
        CHECK(r.trace[g] == running);
    }
    // the reported best is a position that actually produced the best score
    CHECK(memo.at(pos_key(r.best)) == r.best_score);
    CHECK(r.best_score == running);
}

TEST_CASE("sphere benchmark converges in the damped configuration") {
    // The literal update rule carries the previous velocity with
    // coefficient 1 and plateaus near 5e-2 on this benchmark under the
    // |v| <= 1 clamp; the damped setting (inertia 0.72) is the
    // convergence configuration and is what the benchmark gates on.
    SearchSpace space = SearchSpace::standard();
    PsoConfig cfg;
    cfg.n_particles = 10;
    cfg.generations = 50;
    cfg.seed = 42;
    cfg.inertia = 0.72;
    PsoResult r = optimize(space, cfg, sphere);
    CHECK(r.best_score < 1e-2);
    // pinned from the first recorded run of this build
    CHECK(r.best_score == doctest::Approx(0.00152542117204).epsilon(1e-6));
}
