#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "relstock/market_data.hpp"
#include "relstock/relation_graph.hpp"

namespace relstock::synth {

enum class Structure { kRandomWalk, kLeadLag, kConstantGrowth };

std::string_view to_string(Structure s);
Structure parse_structure(std::string_view s);

struct SyntheticMarketSpec {
  std::size_t n = 20;
  std::size_t steps = 2600;
  std::uint64_t seed = 0;
  Structure structure = Structure::kLeadLag;
  // lead-lag
  std::size_t leaders = 5;
  std::size_t lag = 1;
  double signal_sigma = 0.02;  // leader (and random-walk) daily return stddev
  double noise_sigma = 0.01;   // follower idiosyncratic stddev
  // Wire followers to a wrong leader in the graph file (prices unchanged).
  bool shuffle_graph = false;
  // constant-growth
  double growth_rate = 0.01;
  double start_price = 100.0;
};

inline constexpr std::size_t kNoLeader = std::numeric_limits<std::size_t>::max();

struct SyntheticMarket {
  std::vector<market::PriceSeries> series;
  std::vector<std::vector<double>> returns;  // [stock][t], returns[i][0] = 0
  std::vector<std::size_t> leader_of;        // true leader per stock, kNoLeader for leaders
  std::vector<std::size_t> graph_leader_of;  // leader wired in the graph file
  graph::KnowledgeGraph graph;
};

/// Throws a validation error for out-of-range specs.
void validate(const SyntheticMarketSpec& spec);

SyntheticMarket generate_market(const SyntheticMarketSpec& spec);

/// Business-day calendar starting 2000-01-03, weekends skipped.
std::vector<market::Date> business_days(std::size_t count);

}  // namespace relstock::synth
