#include "simreg/survival_order.hpp"

#include <algorithm>
#include <numeric>

#include "simreg/errors.hpp"

namespace simreg {

SurvOrder make_order(const SurvivalSample& sample) {
  const int n = sample.n();
  SurvOrder ord;
  ord.sorted.resize(n);
  std::iota(ord.sorted.begin(), ord.sorted.end(), 0);
  std::stable_sort(ord.sorted.begin(), ord.sorted.end(), [&](int a, int b) {
    return sample.time[a] < sample.time[b];
  });

  for (int pos = 0; pos < n; ++pos) {
    const int i = ord.sorted[pos];
    if (!sample.event[i]) continue;
    ++ord.n_events;
    const double t = sample.time[i];
    if (ord.event_times.empty() || ord.event_times.back() != t) {
      ord.event_times.push_back(t);
      ord.event_count.push_back(1);
    } else {
      ++ord.event_count.back();
    }
  }
  if (ord.n_events == 0)
    throw DataError("null model unidentifiable: no events observed");

  ord.risk_begin.resize(ord.l());
  int pos = 0;
  for (int k = 0; k < ord.l(); ++k) {
    while (pos < n && sample.time[ord.sorted[pos]] < ord.event_times[k]) ++pos;
    ord.risk_begin[k] = pos;
  }

  ord.last_event.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const double t = sample.time[i];
    // last k with event_times[k] <= t
    const auto it = std::upper_bound(ord.event_times.begin(), ord.event_times.end(), t);
    ord.last_event[i] = static_cast<int>(it - ord.event_times.begin()) - 1;
  }
  return ord;
}

}  // namespace simreg
