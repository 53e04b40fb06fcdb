#ifndef SIMREG_SURVIVAL_ORDER_HPP
#define SIMREG_SURVIVAL_ORDER_HPP

#include <Eigen/Dense>
#include <vector>

#include "simreg/domain.hpp"

namespace simreg {

// Shared time ordering for the null fitters: distinct event times, tie
// multiplicities and per-subject position relative to the event grid.
// Risk sets are suffixes of the time-sorted subject order.
struct SurvOrder {
  std::vector<int> sorted;          // subject indices, time ascending
  std::vector<double> event_times;  // distinct, ascending
  std::vector<int> event_count;     // d_k, ties share one grid point
  std::vector<int> risk_begin;      // index into `sorted`: first subject with T >= t_k
  std::vector<int> last_event;      // per subject: last event index k with t_k <= T_i, else -1
  int n_events = 0;

  int l() const { return static_cast<int>(event_times.size()); }
};

SurvOrder make_order(const SurvivalSample& sample);

}  // namespace simreg

#endif
