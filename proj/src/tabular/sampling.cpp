#include "xaistudy/tabular/sampling.hpp"

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/rng.hpp"

namespace xaistudy::tabular {

std::vector<Instance> sample_study_pool(const Dataset& dataset, std::size_t pool_size, std::uint64_t seed) {
  const auto test = dataset.members(Split::test);
  if (pool_size > test.size())
    throw ValidationError("pool_size " + std::to_string(pool_size) + " exceeds the test split (" +
                          std::to_string(test.size()) + " instances)");
  std::vector<std::size_t> order(test.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, "study-pool"));
  rng.shuffle(order);
  std::vector<Instance> pool;
  pool.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) pool.push_back(*test[order[i]]);
  return pool;
}

std::vector<std::size_t> draw_task_indices(std::size_t pool_size, std::size_t k, std::uint64_t participant_seed) {
  if (k > pool_size)
    throw ValidationError("cannot draw " + std::to_string(k) + " tasks from a pool of " + std::to_string(pool_size));
  std::vector<std::size_t> idx(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) idx[i] = i;
  // Partial Fisher-Yates: the first k slots end up uniformly random and ordered.
  Rng rng(derive_seed(participant_seed, "tasks"));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(pool_size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

std::vector<Instance> draw_participant_tasks(const std::vector<Instance>& pool, std::size_t k,
                                             std::uint64_t participant_seed) {
  std::vector<Instance> out;
  out.reserve(k);
  for (auto i : draw_task_indices(pool.size(), k, participant_seed)) out.push_back(pool[i]);
  return out;
}

}  // namespace xaistudy::tabular
