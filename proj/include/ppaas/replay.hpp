#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ppaas/envsim.hpp"

namespace ppaas {

// One stored experience. Stage/Z coherence matches StepOutcome: Z is
// present exactly for stages 2 and 3. Synthetic transitions carry the
// conservative reward and a goal relabeled from a later achieved point.
struct Transition {
    DesignState s;
    ActionVec a;
    double r = 0.0;
    DesignState s_next;
    TargetGoal goal;
    AchievedGoal achieved;
    Vec z0;
    std::optional<Mat> Z;
    int stage = 1;
    int t = 0;  // step index within the episode
    bool terminal = false;
    bool synthetic = false;
};

// Fixed-capacity FIFO ring with uniform with-replacement sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 100000);

    void push(Transition tr);
    std::size_t size() const { return ring_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;  // overwrite cursor once full
    std::vector<Transition> ring_;
};

// Hindsight relabeling with the conservative anchor: every transition except
// the episode's last gets one synthetic twin whose goal is the achieved
// metric vector of a uniformly drawn strictly-later step. Rewards, stage,
// indicators and the terminal flag are all recomputed against the new goal.
std::vector<Transition> cher_relabel(const std::vector<Transition>& episode,
                                     const SpecSchema& schema, const RewardParams& p, Rng& rng);

// Originals and synthetics interleaved into the ring.
void push_episode(ReplayBuffer& replay, const std::vector<Transition>& episode,
                  const std::vector<Transition>& synthetics);

// n uniform draws with replacement.
std::vector<Transition> sample_batch(const ReplayBuffer& replay, int n, Rng& rng);

}  // namespace ppaas
