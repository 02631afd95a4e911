#pragma once

#include <cstdint>
#include <vector>

#include "xaistudy/tabular/dataset.hpp"

namespace xaistudy::tabular {

// Draws the shared study pool from the test split, without replacement.
std::vector<Instance> sample_study_pool(const Dataset& dataset, std::size_t pool_size, std::uint64_t seed);

// One participant's ordered task list: k distinct pool members in random order.
std::vector<Instance> draw_participant_tasks(const std::vector<Instance>& pool, std::size_t k,
                                             std::uint64_t participant_seed);

// Index-level variant used by the study server, which stores pools as ids.
std::vector<std::size_t> draw_task_indices(std::size_t pool_size, std::size_t k, std::uint64_t participant_seed);

}  // namespace xaistudy::tabular
