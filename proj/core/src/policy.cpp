#include "schedleak/policy.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

namespace schedleak {

const char* policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Fcfs: return "fcfs";
        case PolicyKind::Tdma: return "tdma";
        case PolicyKind::AccumulateServe: return "acc_serve";
        case PolicyKind::ProportionalTdma: return "ptdma";
    }
    return "?";
}

PolicyConfig normalize(PolicyConfig config, const TickScale& scale) {
    const Ticks unit = scale.ticks_per_unit();
    if (config.num_users < 2) throw ConfigError("policy: num_users must be >= 2");

    if (config.kind == PolicyKind::Tdma || config.kind == PolicyKind::ProportionalTdma) {
        if (config.slot_length.ticks() == 0) config.slot_length = TickDuration{unit};
        if (config.slot_length.ticks() < 1) throw ConfigError("policy: slot_length must be positive");
    }
    if (config.kind == PolicyKind::AccumulateServe) {
        if (config.accumulate_period.ticks() <= 0)
            throw ConfigError("acc_serve: accumulate period T must be positive");
        if (config.accumulate_period.ticks() % unit != 0)
            throw ConfigError("acc_serve: T must be an integer multiple of the unit service time");
        if (config.user_order.empty()) {
            config.user_order.resize(static_cast<std::size_t>(config.num_users));
            std::iota(config.user_order.begin(), config.user_order.end(), 1);
        }
        std::vector<int> sorted = config.user_order;
        std::sort(sorted.begin(), sorted.end());
        for (int u = 1; u <= config.num_users; ++u)
            if (sorted[static_cast<std::size_t>(u - 1)] != u)
                throw ConfigError("acc_serve: user_order must be a permutation of 1..M");
    }
    if (config.kind == PolicyKind::ProportionalTdma) {
        if (config.adaptation_period.ticks() <= 0)
            throw ConfigError("ptdma: adaptation period L must be positive");
        if (config.adaptation_period.ticks() % config.slot_length.ticks() != 0)
            throw ConfigError("ptdma: L must be an integer multiple of the slot length");
    }
    return config;
}

// ---------------------------------------------------------------------------
// FCFS

Dispatch FcfsScheduler::dispatch(Ticks) {
    if (queue_.empty()) return {};
    JobRecord* job = queue_.front();
    queue_.pop_front();
    return {job, std::nullopt};
}

// ---------------------------------------------------------------------------
// TDMA

TdmaScheduler::TdmaScheduler(Ticks slot_length, int num_users)
    : slot_(slot_length), users_(num_users), queues_(static_cast<std::size_t>(num_users)) {}

void TdmaScheduler::on_arrival(JobRecord& job) {
    if (job.size > slot_)
        throw ConfigError("tdma: job larger than the slot length can never be served");
    queues_[static_cast<std::size_t>(job.owner - 1)].push_back(&job);
    ++backlog_;
}

Dispatch TdmaScheduler::dispatch(Ticks t) {
    const Ticks slot_index = t / slot_;
    const Ticks slot_start = slot_index * slot_;
    if (t == slot_start) {
        auto& q = queues_[static_cast<std::size_t>(slot_index % users_)];
        if (!q.empty()) {
            JobRecord* job = q.front();
            q.pop_front();
            --backlog_;
            return {job, std::nullopt};
        }
    }
    return {nullptr, slot_start + slot_};
}

// ---------------------------------------------------------------------------
// Accumulate and serve

AccServeScheduler::AccServeScheduler(Ticks accumulate_period, int num_users,
                                     std::vector<int> user_order)
    : period_(accumulate_period),
      users_(num_users),
      user_order_(std::move(user_order)),
      unsealed_(static_cast<std::size_t>(num_users)),
      next_seal_(accumulate_period) {}

void AccServeScheduler::on_arrival(JobRecord& job) {
    unsealed_[static_cast<std::size_t>(job.owner - 1)].push_back(&job);
    ++unsealed_count_;
}

void AccServeScheduler::on_forced_event(Ticks t) {
    assert(t == next_seal_);
    // The engine runs seals before same-tick arrivals, so everything queued
    // here arrived strictly before t: batch m covers [(m-1)T, mT).
    Period period;
    period.seal_tick = t;
    period.backlog_before_seal = sealed_work_ + std::max<Ticks>(0, in_service_end_ - t);
    period.batch_ticks = 0;
    for (int user : user_order_) {
        auto& q = unsealed_[static_cast<std::size_t>(user - 1)];
        while (!q.empty()) {
            JobRecord* job = q.front();
            q.pop_front();
            --unsealed_count_;
            sealed_.push_back(job);
            sealed_work_ += job->size;
            period.batch_ticks += job->size;
        }
    }
    periods_.push_back(period);
    next_seal_ += period_;
}

Dispatch AccServeScheduler::dispatch(Ticks t) {
    if (sealed_.empty()) return {nullptr, next_seal_};
    JobRecord* job = sealed_.front();
    sealed_.pop_front();
    sealed_work_ -= job->size;
    in_service_end_ = t + job->size;
    return {job, std::nullopt};
}

bool AccServeScheduler::has_backlog() const {
    return !sealed_.empty() || unsealed_count_ > 0;
}

// ---------------------------------------------------------------------------
// Proportional TDMA

PtdmaScheduler::PtdmaScheduler(Ticks slot_length, Ticks adaptation_period, int num_users,
                               std::uint64_t seed)
    : slot_(slot_length),
      adaptation_(adaptation_period),
      users_(num_users),
      queues_(static_cast<std::size_t>(num_users)),
      arrived_work_(static_cast<std::size_t>(num_users), 0),
      weights_(static_cast<std::size_t>(num_users), 0.0),
      next_adaptation_(adaptation_period),
      rng_(seed) {}

void PtdmaScheduler::on_arrival(JobRecord& job) {
    if (job.size > slot_)
        throw ConfigError("ptdma: job larger than the slot length can never be served");
    queues_[static_cast<std::size_t>(job.owner - 1)].push_back(&job);
    arrived_work_[static_cast<std::size_t>(job.owner - 1)] += job.size;
    ++backlog_;
}

int PtdmaScheduler::draw_owner() {
    const double u = rng_.next_uniform();
    if (weight_total_ <= 0.0) {
        // no arrivals observed yet: fall back to a uniform lottery
        return 1 + std::min(users_ - 1, static_cast<int>(u * users_));
    }
    const double target = u * weight_total_;
    double cum = 0.0;
    for (int i = 0; i < users_; ++i) {
        cum += weights_[static_cast<std::size_t>(i)];
        if (target < cum) return i + 1;
    }
    return users_;
}

Dispatch PtdmaScheduler::dispatch(Ticks t) {
    const Ticks slot_index = t / slot_;
    const Ticks slot_start = slot_index * slot_;
    if (t != slot_start) return {nullptr, slot_start + slot_};

    // The engine dispatches at every slot boundary in order; the lottery
    // below consumes exactly one draw per adapted slot, so slot ownership is
    // independent of queue contents and intra-window arrival times.
    assert(slot_start == expected_slot_start_);
    expected_slot_start_ = slot_start + slot_;

    while (slot_start >= next_adaptation_) {
        // empirical rates: cumulative arrived work per user over elapsed
        // time; only the ratio matters, so the snapshot keeps raw work
        weight_total_ = 0.0;
        for (int i = 0; i < users_; ++i) {
            weights_[static_cast<std::size_t>(i)] =
                static_cast<double>(arrived_work_[static_cast<std::size_t>(i)]);
            weight_total_ += weights_[static_cast<std::size_t>(i)];
        }
        next_adaptation_ += adaptation_;
    }

    int owner;
    if (slot_start < adaptation_) {
        owner = static_cast<int>(slot_index % users_) + 1;  // static rotation in window 0
    } else {
        owner = draw_owner();
    }

    auto& q = queues_[static_cast<std::size_t>(owner - 1)];
    if (!q.empty()) {
        JobRecord* job = q.front();
        q.pop_front();
        --backlog_;
        return {job, std::nullopt};
    }
    return {nullptr, slot_start + slot_};
}

std::unique_ptr<Scheduler> make_scheduler(const PolicyConfig& config, const TickScale& scale,
                                          std::uint64_t seed) {
    const PolicyConfig cfg = normalize(config, scale);
    switch (cfg.kind) {
        case PolicyKind::Fcfs:
            return std::make_unique<FcfsScheduler>();
        case PolicyKind::Tdma:
            return std::make_unique<TdmaScheduler>(cfg.slot_length.ticks(), cfg.num_users);
        case PolicyKind::AccumulateServe:
            return std::make_unique<AccServeScheduler>(cfg.accumulate_period.ticks(),
                                                       cfg.num_users, cfg.user_order);
        case PolicyKind::ProportionalTdma:
            return std::make_unique<PtdmaScheduler>(cfg.slot_length.ticks(),
                                                    cfg.adaptation_period.ticks(), cfg.num_users,
                                                    seed);
    }
    throw ConfigError("unknown policy kind");
}

}  // namespace schedleak
