#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace coordsim {

// Monte Carlo point estimate: sample mean, standard error of the mean, and
// the replica count behind them.
struct EstimateWithCI {
  double mean = 0.0;
  double se = 0.0;
  long long n = 0;
};

// Welford accumulator with a parallel merge, so chunked replica runs reduce
// to the same result in any execution order.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    double delta = other.mean_ - mean_;
    long long total = n_ + other.n_;
    m2_ += other.m2_ + delta * delta * static_cast<double>(n_) *
                           static_cast<double>(other.n_) / static_cast<double>(total);
    mean_ += delta * static_cast<double>(other.n_) / static_cast<double>(total);
    n_ = total;
  }

  long long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double se() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

  EstimateWithCI estimate() const { return {mean(), se(), count()}; }

 private:
  long long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Runs `body(replica_index, acc)` for replica_index in [0, n_replicas),
// partitioned into fixed chunks. Chunk accumulators are merged in chunk
// order, so the result does not depend on the thread count. Acc needs a
// default constructor and merge(const Acc&).
template <class Acc>
Acc run_replicas_chunked(long long n_replicas, int threads,
                         const std::function<void(long long, Acc&)>& body,
                         long long chunk_size = 2048) {
  if (n_replicas < 0) throw std::invalid_argument("negative replica count");
  if (chunk_size < 1) chunk_size = 1;
  long long n_chunks = (n_replicas + chunk_size - 1) / chunk_size;
  std::vector<Acc> partial(static_cast<size_t>(n_chunks));
  auto run_chunk = [&](long long c) {
    long long lo = c * chunk_size;
    long long hi = std::min(n_replicas, lo + chunk_size);
    for (long long i = lo; i < hi; ++i) body(i, partial[static_cast<size_t>(c)]);
  };
  if (threads <= 1 || n_chunks <= 1) {
    for (long long c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<long long> next{0};
    auto worker = [&]() {
      for (;;) {
        long long c = next.fetch_add(1);
        if (c >= n_chunks) return;
        run_chunk(c);
      }
    };
    std::vector<std::thread> pool;
    int n_threads = std::min<long long>(threads, n_chunks);
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  Acc out;
  for (const Acc& p : partial) out.merge(p);
  return out;
}

// Variance estimate from means of batches: replicas are assigned to
// `n_batches` fixed index ranges, the per-batch sample variances are
// averaged, and the spread of the batch values gives the standard error.
class BatchedVariance {
 public:
  explicit BatchedVariance(int n_batches = 30, long long n_replicas = 0)
      : batches_(static_cast<size_t>(n_batches)), n_replicas_(n_replicas) {}

  void add(long long replica_index, double x) {
    size_t b = static_cast<size_t>(replica_index * static_cast<long long>(batches_.size()) /
                                   std::max<long long>(1, n_replicas_));
    if (b >= batches_.size()) b = batches_.size() - 1;
    batches_[b].add(x);
  }

  void merge(const BatchedVariance& other) {
    for (size_t b = 0; b < batches_.size(); ++b) batches_[b].merge(other.batches_[b]);
  }

  // mean and SE of the per-batch variance estimates
  EstimateWithCI variance_estimate() const {
    RunningStats over_batches;
    for (const RunningStats& b : batches_)
      if (b.count() > 1) over_batches.add(b.variance());
    return over_batches.estimate();
  }

  RunningStats pooled() const {
    RunningStats all;
    for (const RunningStats& b : batches_) all.merge(b);
    return all;
  }

 private:
  std::vector<RunningStats> batches_;
  long long n_replicas_ = 0;
};

// Two-sided z-score between independent estimates.
inline double z_score(const EstimateWithCI& a, const EstimateWithCI& b) {
  double denom = std::sqrt(a.se * a.se + b.se * b.se);
  if (denom == 0.0) return a.mean == b.mean ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(a.mean - b.mean) / denom;
}

// Pearson chi-square p-value of observed counts against expected counts.
double chi_square_pvalue(const std::vector<long long>& observed,
                         const std::vector<double>& expected);

}  // namespace coordsim
