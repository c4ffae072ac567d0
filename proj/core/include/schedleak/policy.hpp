#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "schedleak/rng.hpp"
#include "schedleak/timebase.hpp"

namespace schedleak {

enum class PolicyKind { Fcfs, Tdma, AccumulateServe, ProportionalTdma };

const char* policy_name(PolicyKind kind);

struct PolicyConfig {
    PolicyKind kind{PolicyKind::Fcfs};
    int num_users{2};
    TickDuration accumulate_period;  // T (AccumulateServe)
    TickDuration adaptation_period;  // L (ProportionalTdma)
    TickDuration slot_length;        // TDMA / p-TDMA; zero means one unit
    std::vector<int> user_order;     // AccumulateServe service order; empty means 1..M
};

/// Fills defaults (unit slot length, identity user order) and checks the
/// policy invariants: M >= 2, T a positive integer multiple of the unit
/// service time, L a positive multiple of the slot length, user_order a
/// permutation of 1..M. Throws ConfigError.
PolicyConfig normalize(PolicyConfig config, const TickScale& scale);

/// Engine-side job slot. `departure` is -1 until service completes.
struct JobRecord {
    int owner{0};
    std::int64_t seq{0};
    Ticks arrival{0};
    Ticks size{0};
    Ticks departure{-1};
};

/// One service decision. Either `start` is set (begin that job now) or
/// `retry_at` names the next tick at which dispatching is worth retrying
/// (slot or seal boundary); neither set means nothing can change before the
/// next arrival.
struct Dispatch {
    JobRecord* start{nullptr};
    std::optional<Ticks> retry_at;
};

/// A scheduling policy's state machine. The engine admits arrivals in
/// global (arrival tick, owner, seq) order, invokes forced events (seals)
/// before same-tick arrivals, and calls dispatch whenever the server is
/// idle at an event tick.
class Scheduler {
public:
    virtual ~Scheduler() = default;

    /// Next tick at which bookkeeping must run even while the server is busy
    /// (accumulate-and-serve seals). Always strictly ahead of the last
    /// processed event.
    virtual std::optional<Ticks> next_forced_event() const { return std::nullopt; }
    virtual void on_forced_event(Ticks /*t*/) {}

    virtual void on_arrival(JobRecord& job) = 0;

    /// Server idle at tick t: pick a job to start or say when to retry.
    virtual Dispatch dispatch(Ticks t) = 0;

    /// Admitted jobs not yet started.
    virtual bool has_backlog() const = 0;
};

/// Serves jobs in global arrival order; ties broken by (arrival tick,
/// user id, sequence no). Work conserving: never idles with jobs pending.
class FcfsScheduler final : public Scheduler {
    std::deque<JobRecord*> queue_;

public:
    void on_arrival(JobRecord& job) override { queue_.push_back(&job); }
    Dispatch dispatch(Ticks t) override;
    bool has_backlog() const override { return !queue_.empty(); }
};

/// Fixed slot rotation: slot j (0-indexed, length S) belongs to user
/// (j mod M) + 1. At a slot start the owner's head-of-line job is served if
/// one is present; otherwise the server idles for the whole slot, even if
/// other users are backlogged. At most one job starts per slot.
class TdmaScheduler final : public Scheduler {
    Ticks slot_{1};
    int users_{2};
    std::vector<std::deque<JobRecord*>> queues_;
    std::int64_t backlog_{0};

public:
    TdmaScheduler(Ticks slot_length, int num_users);
    void on_arrival(JobRecord& job) override;
    Dispatch dispatch(Ticks t) override;
    bool has_backlog() const override { return backlog_ > 0; }
};

/// Buffers arrivals and seals them every T ticks: jobs arriving in
/// [(m-1)T, mT) become batch m at time mT, appended to the sealed backlog in
/// user_order (FIFO within a user). The server works through sealed jobs
/// back to back, straight across seal boundaries when the backlog carries
/// over, and idles only when no sealed work remains. Jobs arriving during
/// service wait for the next seal.
class AccServeScheduler final : public Scheduler {
public:
    struct Period {
        Ticks seal_tick;            // seal m happens at tick m*T
        Ticks backlog_before_seal;  // sealed-but-unfinished work at mT-
        Ticks batch_ticks;          // work sealed at mT
    };

    AccServeScheduler(Ticks accumulate_period, int num_users, std::vector<int> user_order);

    std::optional<Ticks> next_forced_event() const override { return next_seal_; }
    void on_forced_event(Ticks t) override;
    void on_arrival(JobRecord& job) override;
    Dispatch dispatch(Ticks t) override;
    bool has_backlog() const override;

    const std::vector<Period>& periods() const { return periods_; }

private:
    Ticks period_{1};
    int users_{2};
    std::vector<int> user_order_;
    std::vector<std::deque<JobRecord*>> unsealed_;
    std::deque<JobRecord*> sealed_;
    Ticks sealed_work_{0};       // queued sealed work, excluding the job in service
    Ticks in_service_end_{0};    // end tick of the sealed job in service (0 = none)
    Ticks next_seal_;
    std::int64_t unsealed_count_{0};
    std::vector<Period> periods_;
};

/// Slotted policy that assigns each slot by lottery in proportion to the
/// users' empirical arrival rates. Window [0, L) uses a fixed rotation like
/// TDMA; at every multiple of L the cumulative per-user arrived work is
/// snapshotted, and every later slot draws its owner from the policy RNG
/// with probability proportional to that snapshot (uniform while all
/// snapshots are zero). One draw is consumed per slot from L on, whether or
/// not any queue is occupied, so the slot assignment is a function of the
/// per-window arrival counts and the RNG stream alone.
class PtdmaScheduler final : public Scheduler {
    Ticks slot_{1};
    Ticks adaptation_{1};
    int users_{2};
    std::vector<std::deque<JobRecord*>> queues_;
    std::int64_t backlog_{0};
    std::vector<Ticks> arrived_work_;   // cumulative, per user
    std::vector<double> weights_;       // snapshot at the last adaptation boundary
    double weight_total_{0.0};
    Ticks next_adaptation_;
    Ticks expected_slot_start_{0};      // every slot boundary must dispatch exactly once
    Rng rng_;

    int draw_owner();

public:
    PtdmaScheduler(Ticks slot_length, Ticks adaptation_period, int num_users, std::uint64_t seed);
    void on_arrival(JobRecord& job) override;
    Dispatch dispatch(Ticks t) override;
    bool has_backlog() const override { return backlog_ > 0; }
};

std::unique_ptr<Scheduler> make_scheduler(const PolicyConfig& config, const TickScale& scale,
                                          std::uint64_t seed);

}  // namespace schedleak
