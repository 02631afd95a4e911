#include "xaistudy/power/cost.hpp"

#include "xaistudy/common/error.hpp"

namespace xaistudy::power {

void CostQuery::validate() const {
  if (n_participants < 0 || tasks_per_participant < 0 || avg_task_seconds < 0 || overhead_minutes < 0 ||
      hourly_rate < 0 || platform_fee_fraction < 0)
    throw ValidationError("cost query fields must be non-negative");
}

CostEstimate estimate_cost(const CostQuery& q) {
  q.validate();
  CostEstimate e;
  e.minutes_per_participant = q.tasks_per_participant * q.avg_task_seconds / 60.0 + q.overhead_minutes;
  e.pay_per_participant = e.minutes_per_participant / 60.0 * q.hourly_rate;
  e.participant_payments = static_cast<double>(q.n_participants) * e.pay_per_participant;
  e.platform_fee = e.participant_payments * q.platform_fee_fraction;
  e.total = e.participant_payments * (1.0 + q.platform_fee_fraction);
  return e;
}

Json to_json(const CostQuery& q) {
  return Json{{"n_participants", q.n_participants},
              {"tasks_per_participant", q.tasks_per_participant},
              {"avg_task_seconds", q.avg_task_seconds},
              {"overhead_minutes", q.overhead_minutes},
              {"hourly_rate", q.hourly_rate},
              {"platform_fee_fraction", q.platform_fee_fraction}};
}

Json to_json(const CostEstimate& e) {
  return Json{{"minutes_per_participant", e.minutes_per_participant},
              {"pay_per_participant", e.pay_per_participant},
              {"participant_payments", e.participant_payments},
              {"platform_fee", e.platform_fee},
              {"total", e.total}};
}

}  // namespace xaistudy::power
