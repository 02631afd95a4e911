#pragma once

#include "xaistudy/common/json_io.hpp"

namespace xaistudy::power {

struct CostQuery {
  long n_participants = 0;
  int tasks_per_participant = 20;
  double avg_task_seconds = 0.0;
  double overhead_minutes = 0.0;
  double hourly_rate = 0.0;
  double platform_fee_fraction = 0.0;

  void validate() const;
};

struct CostEstimate {
  double minutes_per_participant = 0.0;
  double pay_per_participant = 0.0;
  double participant_payments = 0.0;
  double platform_fee = 0.0;
  double total = 0.0;
};

// minutes = tasks * seconds / 60 + overhead;
// total = n * minutes / 60 * rate * (1 + fee).
CostEstimate estimate_cost(const CostQuery& query);

Json to_json(const CostQuery& query);
Json to_json(const CostEstimate& estimate);

}  // namespace xaistudy::power
