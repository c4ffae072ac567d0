#include "schedleak/engine.hpp"

#include <algorithm>
#include <optional>

namespace schedleak {

namespace {

constexpr std::uint64_t kPolicyStream = 0x706f6c696379ULL;  // policy lottery sub-seed

Ticks overlap_with_horizon(Ticks begin, Ticks end, Ticks horizon) {
    const Ticks lo = std::min(begin, horizon);
    const Ticks hi = std::min(end, horizon);
    return hi - lo;
}

}  // namespace

SimulationResult run(const PolicyConfig& policy, const std::vector<ArrivalTrace>& traces,
                     TickTime horizon, std::uint64_t seed, const TickScale& scale) {
    const PolicyConfig config = normalize(policy, scale);

    // Admit each trace as a per-user job table.
    std::vector<std::vector<JobRecord>> records(static_cast<std::size_t>(config.num_users));
    std::size_t total_jobs = 0;
    for (const ArrivalTrace& trace : traces) {
        if (trace.owner < 1 || trace.owner > config.num_users)
            throw ConfigError("run: trace owner outside 1..num_users");
        auto& user_records = records[static_cast<std::size_t>(trace.owner - 1)];
        if (!user_records.empty()) throw ConfigError("run: duplicate trace for one owner");
        if (trace.job_size.ticks() <= 0) throw ConfigError("run: job size must be positive");
        user_records.reserve(trace.arrivals.size());
        Ticks prev = 0;
        std::int64_t seq = 0;
        for (const TickTime& a : trace.arrivals) {
            if (a.ticks() <= prev && seq > 0)
                throw ConfigError("run: arrival times must be strictly increasing");
            user_records.push_back(
                JobRecord{trace.owner, seq++, a.ticks(), trace.job_size.ticks(), -1});
            prev = a.ticks();
        }
        total_jobs += user_records.size();
    }

    // Global arrival order with the FCFS tie-break baked in.
    std::vector<JobRecord*> order;
    order.reserve(total_jobs);
    for (auto& user_records : records)
        for (auto& r : user_records) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](const JobRecord* a, const JobRecord* b) {
        if (a->arrival != b->arrival) return a->arrival < b->arrival;
        if (a->owner != b->owner) return a->owner < b->owner;
        return a->seq < b->seq;
    });

    auto scheduler = make_scheduler(config, scale, derive_seed(seed, kPolicyStream));

    SimulationResult result;
    result.scale = scale;
    result.horizon = horizon;
    result.users.resize(static_cast<std::size_t>(config.num_users));

    std::size_t next_arrival = 0;
    bool busy = false;
    Ticks busy_until = 0;
    // Kick the dispatch chain off at tick 0 so slotted policies see every
    // slot boundary from the start.
    std::optional<Ticks> retry = 0;
    Ticks now = -1;

    for (;;) {
        const bool arrivals_left = next_arrival < order.size();
        if (!arrivals_left && !busy && !scheduler->has_backlog()) break;

        std::optional<Ticks> tick;
        auto consider = [&tick](std::optional<Ticks> c) {
            if (c && (!tick || *c < *tick)) tick = c;
        };
        if (arrivals_left) consider(order[next_arrival]->arrival);
        if (busy) consider(busy_until);
        if (!busy) consider(retry);
        consider(scheduler->next_forced_event());
        if (!tick || *tick <= now) throw Error("engine: event loop stalled");
        const Ticks t = *tick;

        if (auto forced = scheduler->next_forced_event(); forced && *forced == t)
            scheduler->on_forced_event(t);
        while (next_arrival < order.size() && order[next_arrival]->arrival == t) {
            scheduler->on_arrival(*order[next_arrival]);
            ++next_arrival;
        }
        if (busy && busy_until == t) busy = false;
        if (!busy) {
            retry.reset();
            Dispatch d = scheduler->dispatch(t);
            if (d.start) {
                busy = true;
                busy_until = t + d.start->size;
                d.start->departure = busy_until;
                result.busy_ticks += overlap_with_horizon(t, busy_until, horizon.ticks());
            } else {
                retry = d.retry_at;
            }
        }
        now = t;
    }

    result.idle_ticks = horizon.ticks() - result.busy_ticks;
    for (int user = 1; user <= config.num_users; ++user) {
        auto& out = result.users[static_cast<std::size_t>(user - 1)];
        const auto& user_records = records[static_cast<std::size_t>(user - 1)];
        out.reserve(user_records.size());
        for (const JobRecord& r : user_records) {
            if (r.departure < 0) throw Error("engine: job left unserved");
            if (r.departure > horizon.ticks()) ++result.censored_jobs;
            out.push_back(Job{r.owner, r.seq, TickTime{r.arrival}, TickDuration{r.size},
                              TickTime{r.departure}});
        }
    }
    if (config.kind == PolicyKind::AccumulateServe)
        result.acc_serve_periods =
            static_cast<const AccServeScheduler*>(scheduler.get())->periods();
    return result;
}

SimulationResult warmup_trim(const SimulationResult& result, TickTime warmup) {
    if (warmup >= result.horizon && warmup.ticks() > 0)
        throw ConfigError("warmup_trim: warmup must precede the horizon");
    SimulationResult trimmed;
    trimmed.scale = result.scale;
    trimmed.horizon = result.horizon;
    trimmed.busy_ticks = result.busy_ticks;
    trimmed.idle_ticks = result.idle_ticks;
    trimmed.censored_jobs = result.censored_jobs;
    trimmed.users.resize(result.users.size());
    for (std::size_t u = 0; u < result.users.size(); ++u) {
        for (const Job& job : result.users[u])
            if (job.arrival >= warmup) trimmed.users[u].push_back(job);
    }
    for (const auto& p : result.acc_serve_periods)
        if (p.seal_tick > warmup.ticks()) trimmed.acc_serve_periods.push_back(p);
    return trimmed;
}

}  // namespace schedleak
