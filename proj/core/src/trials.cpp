#include "lerkit/trials.hpp"

#include <algorithm>
#include <atomic>

#include "lerkit/error.hpp"
#include "lerkit/model.hpp"
#include "lerkit/parallel.hpp"
#include "lerkit/recovery.hpp"

namespace lerkit::trials {

SpoofedStreams::SpoofedStreams(double p, std::size_t trials, const RandomSource& src)
    : p_(p), words_(trials) {
  rngs_.reserve(trials);
  for (std::size_t j = 0; j < trials; ++j) rngs_.push_back(src.derive(j));
}

void SpoofedStreams::extend(std::size_t trial) {
  RandomSource& rng = rngs_[trial];
  std::uint64_t word = 0;
  for (unsigned b = 0; b < 64; ++b) {
    if (bernoulli(rng, 1.0 - p_)) word |= std::uint64_t{1} << b;
  }
  words_[trial].push_back(word);
}

bool SpoofedStreams::bit(std::size_t trial, std::size_t step) {
  const std::size_t index = step - 1;
  auto& words = words_[trial];
  while (words.size() <= index / 64) extend(trial);
  return (words[index / 64] >> (index % 64)) & 1U;
}

DetectionProfile::DetectionProfile(SpoofedStreams& streams, std::size_t step_cap)
    : streams_(&streams), step_cap_(step_cap) {}

void DetectionProfile::reset(std::span<const double> weights) {
  if (weights.empty() || weights.size() > kMaxWindow) {
    throw InvalidParam("T", "trial engine needs 1 <= T <= 64");
  }
  weights_.assign(weights.begin(), weights.end());
  full_mask_ = weights.size() == 64 ? ~std::uint64_t{0}
                                    : (std::uint64_t{1} << weights.size()) - 1;
  cursors_.assign(streams_->trials(), Cursor{});
  records_.resize(streams_->trials());
  for (auto& r : records_) r.clear();
}

std::uint32_t DetectionProfile::first_passage(std::size_t trial, double t, std::uint64_t limit) {
  Cursor& cur = cursors_[trial];
  auto& recs = records_[trial];
  if (cur.max_d > t) {
    auto it = std::upper_bound(recs.begin(), recs.end(), t,
                               [](double value, const Record& r) { return value < r.max_d; });
    return it->step;
  }
  const std::uint64_t stop = std::min<std::uint64_t>(step_cap_, limit);
  while (cur.step < stop) {
    ++cur.step;
    cur.mask = ((cur.mask << 1) | (streams_->bit(trial, cur.step) ? 1U : 0U)) & full_mask_;
    const double d = recovery::score_mask(cur.mask, weights_);
    if (d > cur.max_d) {
      cur.max_d = d;
      recs.push_back({cur.step, d});
      if (d > t) return cur.step;
    }
  }
  return cur.step;
}

std::optional<StepTotals> DetectionProfile::totals(double t, std::uint64_t budget) {
  const std::size_t n = streams_->trials();
  std::vector<StepTotals> partial(chunk_count(n));
  std::atomic<std::uint64_t> running{0};
  std::atomic<bool> exceeded{false};

  for_each_chunk(n, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    StepTotals local;
    for (std::size_t j = begin; j < end; ++j) {
      if (exceeded.load(std::memory_order_relaxed)) return;
      const std::uint64_t seen = running.load(std::memory_order_relaxed) + local.sum;
      const std::uint64_t room = seen >= budget ? 0 : budget - seen;
      // Any trial longer than `room` already pushes the total over budget.
      const std::uint64_t limit = room == UINT64_MAX ? room : room + 1;
      const std::uint32_t s = first_passage(j, t, limit);
      const bool detected = cursors_[j].max_d > t;
      if (!detected && s < step_cap_) {
        exceeded = true;
        return;
      }
      if (!detected) ++local.capped;
      if (s > room) {
        exceeded = true;
        return;
      }
      local.sum += s;
      local.sum_sq += static_cast<double>(s) * static_cast<double>(s);
    }
    running += local.sum;
    partial[chunk] = local;
  });

  if (exceeded) return std::nullopt;
  StepTotals total;
  for (const auto& part : partial) {
    total.sum += part.sum;
    total.sum_sq += part.sum_sq;
    total.capped += part.capped;
  }
  if (total.sum > budget) return std::nullopt;
  return total;
}

UnspoofedWindows::UnspoofedWindows(double p, std::size_t window, std::size_t trials,
                                   const RandomSource& src)
    : window_(window), masks_(trials) {
  if (window == 0 || window > kMaxWindow) {
    throw InvalidParam("T", "trial engine needs 1 <= T <= 64");
  }
  for_each_chunk(trials, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      RandomSource rng = src.derive(j);
      std::uint64_t mask = 0;
      for (std::size_t i = 0; i < window; ++i) {
        if (bernoulli(rng, p)) mask |= std::uint64_t{1} << i;
      }
      masks_[j] = mask;
    }
  });
}

std::size_t UnspoofedWindows::count_at_or_below(std::span<const double> weights, double t) const {
  if (weights.size() != window_) throw CapacityMismatch(window_, weights.size());
  std::vector<std::size_t> partial(chunk_count(masks_.size()));
  for_each_chunk(masks_.size(), [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::size_t count = 0;
    for (std::size_t j = begin; j < end; ++j) {
      if (recovery::score_mask(masks_[j], weights) <= t) ++count;
    }
    partial[chunk] = count;
  });
  std::size_t total = 0;
  for (auto c : partial) total += c;
  return total;
}

}  // namespace lerkit::trials
