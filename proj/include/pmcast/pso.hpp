#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pmcast/hyperspace.hpp"
#include "pmcast/rng.hpp"

namespace pmcast {

// Swarm settings. phi1 scales the personal-best pull, phi2 the global-best
// pull (1.5 / 2.0 in the reference setup). Velocity components are clamped
// to |v| <= v_clamp; a signed clamp to [0,1] would forbid downward moves.
struct PsoConfig {
    int n_particles = 10;
    int generations = 5;
    double phi1 = 1.5;
    double phi2 = 2.0;
    double inertia = 1.0; // the update rule carries v with coefficient 1
    double v_clamp = 1.0;
    std::optional<std::uint64_t> eval_budget; // optional hard cap, >= n_particles
    std::uint64_t seed = 0;

    void validate() const;
};

struct Particle {
    HyperVector position;
    std::vector<double> velocity;
    HyperVector pbest;
    double pbest_score = 0.0;
};

struct Swarm {
    std::vector<Particle> particles;
    HyperVector gbest;
    double gbest_score = 0.0;
    int generation = 0;
    std::uint64_t evaluations = 0;
};

using Objective = std::function<double(const HyperVector&)>;
// Evaluates a batch of positions; entries may be computed concurrently.
using BatchEvaluator = std::function<std::vector<double>(const std::vector<HyperVector>&)>;

// Uniform positions, zero velocities, every particle scored once;
// gbest = argmin (first index wins ties).
Swarm init_swarm(const SearchSpace& space, const PsoConfig& cfg, const Objective& objective,
                 Rng& rng);

// v <- inertia*v + U(0,phi2)*(gbest - x) + U(0,phi1)*(pbest - x), drawn
// independently per component, then magnitude-clamped.
void velocity_update(Particle& p, const HyperVector& gbest, const PsoConfig& cfg, Rng& rng);

// x <- clamp01(x + v).
void position_update(Particle& p);

// Per-component helpers backing velocity_update; exposed so the update rule
// can be checked with forced draws.
double raw_velocity_component(double v, double x, double pbest, double gbest, double u1,
                              double u2, double inertia);
double clamp_velocity_component(double v, double v_clamp);

struct PsoResult {
    HyperVector best;
    double best_score = 0.0;
    std::vector<double> trace;            // gbest_score after init and per generation
    std::vector<HyperVector> trace_best;  // the matching gbest positions
    std::uint64_t evaluations = 0;
};

// Full run: init + `generations` sweeps (velocity, position, re-evaluate,
// refresh bests). Stops early once eval_budget is exhausted. When a batch
// evaluator is supplied it receives the per-generation positions; random
// draws are pre-assigned in particle order, so results do not depend on
// evaluation scheduling.
PsoResult optimize(const SearchSpace& space, const PsoConfig& cfg, const Objective& objective,
                   const BatchEvaluator* batch_eval = nullptr);

} // namespace pmcast
