#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "datev/learner.hpp"
#include "datev/reward.hpp"

namespace datev {

/// A deadline-constrained job: input size, result size, CPU demand,
/// replication budget, deadline, and when it arrived.
struct Task {
    std::int64_t id = 0;
    double x_bits = 1e6;
    double y_bits = 5e5;
    double w_cycles = 2e8;
    int budget = 1;
    double deadline = 1.0;      // seconds
    double arrival_time = 0.0;  // simulated seconds
    int tav_id = -1;
};

struct TimedPosition {
    double t = 0.0;  // simulated seconds
    double x = 0.0;  // planar meters
    double y = 0.0;
};

/// A replication attempt failed structurally: the vehicle's trace ended, or
/// no roadside unit covers it when the result must be returned.
class DeliveryError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vehicle {
    int id = 0;
    std::vector<TimedPosition> trace;  // timestamps strictly increasing
    double cpu_frequency = 2e9;        // cycles/s offered when serving
    bool is_sev = false;

    bool covers_time(double t) const;
    /// Linear interpolation between trace points; throws DeliveryError
    /// outside the trace's time span.
    TimedPosition position_at(double t) const;
    /// Average speed over the trace segment enclosing t (m/s).
    double speed_at(double t) const;
};

struct RsuLayout {
    std::vector<std::pair<double, double>> positions;  // planar meters
    double coverage_radius = 300.0;

    /// Index of the nearest unit within coverage_radius of (x, y), or -1.
    int nearest_covering(double x, double y) const;
};

struct RadioParams {
    double tx_power = 0.01;            // W (10 dBm)
    double path_loss_exponent = 2.0;
    double noise = 6.31e-21;           // W (-172 dBm)
    double interference = 0.0;         // W
    double sinr_threshold = 0.15;
    double bandwidth = 1e7;            // Hz
    double operated_rate = 3e6;        // bits/s, fixed RSU<->vehicle service rate
    double backhaul_rate_min = 0.5e6;  // bits/s
    double backhaul_rate_max = 1.5e6;
    double backhaul_rtt_min = 0.02;  // s
    double backhaul_rtt_max = 0.3;
};

struct DelayBreakdown {
    double d_tr = 0;  // task upload, vehicle -> RSU
    double d_rs = 0;  // task dispatch, RSU -> server vehicle
    double d_c = 0;   // computation
    double d_sr = 0;  // result upload, server vehicle -> its RSU
    double d_rr = 0;  // backhaul between RSUs (0 when they coincide)
    double d_rt = 0;  // result delivery, RSU -> task vehicle

    double total() const { return d_tr + d_rs + d_c + d_sr + d_rr + d_rt; }
};

/// Received signal-to-noise-plus-interference ratio at `distance` meters.
double sinr(const RadioParams& radio, double distance);

/// Achievable rate in bits/s for a given SINR.
double shannon_rate(const RadioParams& radio, double sinr_value);

/// 1 iff the replication finished by the deadline.
int realize_quality(const DelayBreakdown& delay, double deadline);

/// Server vehicles usable from the given roadside unit at `time`: within
/// coverage, link SINR at least the threshold, and not the task's own
/// vehicle.
std::vector<int> available_sevs(const std::pair<double, double>& rsu_position,
                                const std::vector<Vehicle>& vehicles, double time,
                                const RadioParams& radio, double coverage_radius,
                                int exclude_vehicle);

/// Full delay chain for running `task` on `sev`. Backhaul rate and RTT are
/// drawn from `rng` when the serving and returning roadside units differ.
/// Throws DeliveryError if a trace ends or no unit covers a vehicle when the
/// result returns.
DelayBreakdown service_delay(const Task& task, const Vehicle& sev, const Vehicle& tav,
                             const RsuLayout& rsus, const RadioParams& radio,
                             std::mt19937_64& rng);

struct TaskGenConfig {
    double lambda = 1.0;  // tasks/second
    std::int64_t max_tasks = 1000;
    double start_time = 0.0;
    double end_time = 1e18;
    double x_bits = 1e6;
    double y_bits = 5e5;
    double w_cycles = 2e8;
    double deadline_min = 1.0;
    double deadline_max = 2.5;
    int budget_min = 1;
    int budget_max = 5;
};

struct TaskStream {
    std::vector<Task> tasks;
    std::int64_t dropped = 0;  // arrivals with no coverable task vehicle
};

/// Poisson task arrivals; each task is bound to a uniformly chosen non-server
/// vehicle inside some unit's coverage. Arrivals with no eligible vehicle are
/// counted as dropped.
TaskStream generate_tasks(const TaskGenConfig& config, const std::vector<Vehicle>& vehicles,
                          const RsuLayout& rsus, std::mt19937_64& rng);

struct ContextBounds {
    double speed_max = 25.0;     // m/s
    double distance_max = 600.0; // m
    double deadline_min = 1.0;
    double deadline_max = 2.5;
};

/// Trace-mode context: (TaV speed, SeV speed, TaV-SeV distance, deadline),
/// min-max normalized into [0,1] and clamped at the bounds.
ContextVector context_of(const Task& task, const Vehicle& sev, const Vehicle& tav, double time,
                         const ContextBounds& bounds);

/// One candidate replication as the environment knows it: the public context
/// plus the hidden ground truth the policies never see.
struct Candidate {
    int id = 0;  // server-vehicle id
    ContextVector phi;
    double true_mu = 0.0;        // exact (synthetic) or Monte-Carlo (trace)
    int quality = 0;             // realized outcome, fixed per (task, candidate)
    double feedback_delay = 0.0; // seconds from decision until observable
};

struct TaskRound {
    Task task;
    std::vector<Candidate> candidates;

    std::vector<std::pair<int, ContextVector>> candidate_views() const;
    QualityVector mu_vector() const;
};

class World {
public:
    virtual ~World() = default;
    /// Next decision round, or nullopt when the run is over.
    virtual std::optional<TaskRound> next_round() = 0;
    virtual std::int64_t dropped_arrivals() const { return 0; }
};

/// Closed-form world for exact regret accounting. Contexts are
/// (severity, normalized deadline, [inert extras]); a replication's delay is
/// uniform on [a, a + spread] with a = base_delay + severity_slope * severity,
/// so the success probability given context is
///   mu(phi) = clamp((deadline - a) / spread, 0, 1),
/// piecewise linear and Lipschitz with constant
///   sqrt((severity_slope/spread)^2 + ((deadline_max-deadline_min)/spread)^2).
struct SyntheticConfig {
    std::int64_t horizon = 10000;
    double lambda = 1.0;
    int dim = 2;
    int sev_pool = 40;
    int candidates_min = 8;
    int candidates_max = 8;
    int budget_min = 1;
    int budget_max = 5;
    double deadline_min = 1.0;
    double deadline_max = 2.5;
    double base_delay = 0.1;      // a0, seconds
    double severity_slope = 1.0;  // a1, seconds per unit severity
    double delay_spread = 2.0;    // s, seconds
    double severity_power = 1.0;  // severity ~ U[0,1]^power per vehicle
    double severity_jitter = 0.05;
};

class SyntheticWorld : public World {
public:
    SyntheticWorld(SyntheticConfig config, std::uint64_t seed);

    std::optional<TaskRound> next_round() override;

    /// Ground-truth success probability for a context.
    double true_mu_of(const ContextVector& phi) const;
    /// Lipschitz constant of the quality function over the context space.
    double smoothness_bound() const;
    const SyntheticConfig& config() const { return config_; }

private:
    SyntheticConfig config_;
    std::uint64_t seed_;
    std::int64_t emitted_ = 0;
    double clock_ = 0.0;
    std::mt19937_64 arrival_rng_;
    std::vector<double> sev_severity_;  // persistent per-vehicle severity
};

/// Trace-driven world: tasks bound to real vehicle motion, candidate sets
/// gated by SINR, delays from the full chain, and ground-truth mu estimated
/// by Monte-Carlo over the stochastic backhaul draws.
struct TraceWorldConfig {
    TaskGenConfig tasks;
    RadioParams radio;
    ContextBounds context;
    double sev_fraction = 0.5;
    double cpu_min = 2e9;
    double cpu_max = 8e9;
    int mc_samples = 1000;
};

class TraceWorld : public World {
public:
    /// Assigns server roles and CPU frequencies to a copy of `vehicles`
    /// deterministically from the seed, then pre-generates the task stream.
    TraceWorld(TraceWorldConfig config, std::vector<Vehicle> vehicles, RsuLayout rsus,
               std::uint64_t seed);

    std::optional<TaskRound> next_round() override;
    std::int64_t dropped_arrivals() const override { return stream_.dropped; }
    const std::vector<Vehicle>& vehicles() const { return vehicles_; }

private:
    TraceWorldConfig config_;
    std::vector<Vehicle> vehicles_;
    RsuLayout rsus_;
    std::uint64_t seed_;
    TaskStream stream_;
    std::size_t cursor_ = 0;
};

}  // namespace datev
