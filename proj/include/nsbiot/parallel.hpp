#pragma once

#include <Eigen/SparseCore>

#include <omp.h>

#include <utility>
#include <vector>

namespace nsbiot {

/// Serial execution is the reference; Parallel must produce bit-identical
/// output (same entries in the same order).
enum class Exec { Serial, Parallel };

using Triplet = Eigen::Triplet<double>;
using VectorEntry = std::pair<int, double>;

/// Runs body(cell, out) for every cell and concatenates the per-cell output in
/// cell order. Parallel mode splits the range into contiguous chunks, one
/// buffer per chunk, so the merge order never depends on scheduling.
template <class T, class Body>
std::vector<T> gather_cells(int num_cells, Exec exec, Body&& body) {
  std::vector<T> out;
  if (exec == Exec::Serial || num_cells < 2) {
    for (int c = 0; c < num_cells; ++c) body(c, out);
    return out;
  }
  const int chunks = std::min(num_cells, 4 * omp_get_max_threads());
  std::vector<std::vector<T>> buffers(chunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < chunks; ++k) {
    const int begin = static_cast<int>(static_cast<long long>(num_cells) * k / chunks);
    const int end = static_cast<int>(static_cast<long long>(num_cells) * (k + 1) / chunks);
    for (int c = begin; c < end; ++c) body(c, buffers[k]);
  }
  std::size_t total = 0;
  for (const auto& b : buffers) total += b.size();
  out.reserve(total);
  for (auto& b : buffers) out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace nsbiot
