#pragma once

// Chimera graphs and +-J Ising instances.
//
// Sign convention (matches the cost function the annealer minimizes):
//
//     H(s) = sum_<ij> J_ij s_i s_j + sum_i h_i s_i
//
// so a POSITIVE coupling favors ANTI-alignment. Many spin-glass codes use
// the opposite sign; instance files written here are not interchangeable
// with those without negating J.
//
// Vertex numbering: cells are numbered row-major, then the cell half
// (0 = left, 1 = right), then the index inside the half:
//
//     id = ((row * cols + col) * 2 + half) * k + unit
//
// Intra-cell edges join every left unit to every right unit (K_{k,k}).
// Left units couple vertically to the same unit of the cell below; right
// units couple horizontally to the same unit of the cell to the right.

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sglab/fixed.hpp"
#include "sglab/rng.hpp"

namespace sglab::chimera {

using VertexId = std::uint32_t;

struct Edge {
  VertexId u = 0;  // u < v
  VertexId v = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct VertexCoord {
  int row = 0;
  int col = 0;
  int half = 0;
  int unit = 0;
};

/// Neighbor of an active vertex, in active-index space.
struct Neighbor {
  std::uint32_t vertex;
  std::uint32_t edge;
};

class ChimeraGraph {
 public:
  ChimeraGraph(int rows, int cols, int half_size, std::set<VertexId> dead);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int half_size() const { return k_; }

  std::size_t ideal_vertex_count() const;
  std::size_t ideal_edge_count() const;

  /// Active vertex ids in increasing order. Position in this list is the
  /// vertex's "active index", used by SpinConfig, Gauge and fields.
  const std::vector<VertexId>& active() const { return active_; }
  std::size_t vertex_count() const { return active_.size(); }
  const std::set<VertexId>& dead() const { return dead_; }
  bool is_dead(VertexId v) const { return dead_.contains(v); }
  bool in_range(VertexId v) const { return v < ideal_vertex_count(); }

  /// Active edges sorted by (u, v), in vertex-id space.
  const std::vector<Edge>& edges() const { return edges_; }
  /// Endpoints of edge e as active indices.
  std::pair<std::uint32_t, std::uint32_t> edge_endpoints(std::size_t e) const { return local_edges_[e]; }

  std::optional<std::uint32_t> index_of(VertexId v) const;
  std::optional<std::size_t> edge_index(VertexId a, VertexId b) const;
  std::span<const Neighbor> neighbors(std::uint32_t index) const;
  std::size_t degree(std::uint32_t index) const { return neighbors(index).size(); }
  std::size_t max_degree() const;

  /// Bipartition class (0 or 1) of an active index. Every edge joins the
  /// two classes: color = (row + col + half) mod 2.
  int color(std::uint32_t index) const { return colors_[index]; }

  VertexCoord coord(VertexId v) const;
  VertexId vertex_id(int row, int col, int half, int unit) const;

  friend bool operator==(const ChimeraGraph& a, const ChimeraGraph& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.k_ == b.k_ && a.dead_ == b.dead_;
  }

 private:
  int rows_;
  int cols_;
  int k_;
  std::set<VertexId> dead_;
  std::vector<VertexId> active_;
  std::vector<std::int32_t> index_of_;  // -1 for dead
  std::vector<Edge> edges_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> local_edges_;
  std::vector<std::uint32_t> adj_offsets_;
  std::vector<Neighbor> adj_;
  std::vector<std::uint8_t> colors_;
};

/// Builds the (rows x cols) Chimera graph with K_{k,k} cells, dead vertices
/// removed together with their incident edges. Throws sglab::Error for
/// non-positive sizes or dead ids outside the ideal vertex range.
std::shared_ptr<const ChimeraGraph> build_chimera(int rows, int cols, int k,
                                                  const std::set<VertexId>& dead = {});

/// Configuration of +-1 spins over the active vertices.
class SpinConfig {
 public:
  SpinConfig() = default;
  explicit SpinConfig(std::size_t n, std::int8_t value = 1) : s_(n, value) {}
  explicit SpinConfig(std::vector<std::int8_t> values);

  std::size_t size() const { return s_.size(); }
  std::int8_t operator[](std::size_t i) const { return s_[i]; }
  void set(std::size_t i, std::int8_t value) { s_[i] = value; }
  void flip(std::size_t i) { s_[i] = static_cast<std::int8_t>(-s_[i]); }
  std::span<const std::int8_t> values() const { return s_; }
  SpinConfig flipped() const;

  /// '+'/'-' rendering, one character per spin.
  std::string to_string() const;
  static std::optional<SpinConfig> parse(std::string_view text);

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  std::vector<std::int8_t> s_;
};

/// Gauge transformation: eta_i = +-1 per active vertex.
class Gauge {
 public:
  explicit Gauge(std::vector<std::int8_t> eta);
  static Gauge identity(std::size_t n) { return Gauge(std::vector<std::int8_t>(n, 1)); }
  static Gauge random(std::size_t n, Rng& rng);

  std::size_t size() const { return eta_.size(); }
  std::int8_t operator[](std::size_t i) const { return eta_[i]; }

 private:
  std::vector<std::int8_t> eta_;
};

class Instance {
 public:
  Instance(std::shared_ptr<const ChimeraGraph> graph, std::vector<Fixed> couplings,
           std::vector<Fixed> fields, std::string id, std::uint64_t seed);

  const ChimeraGraph& graph() const { return *graph_; }
  const std::shared_ptr<const ChimeraGraph>& graph_ptr() const { return graph_; }
  /// Coupling of edge e (indexing graph().edges()).
  std::span<const Fixed> couplings() const { return couplings_; }
  /// Field of active index i.
  std::span<const Fixed> fields() const { return fields_; }
  const std::string& id() const { return id_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t spin_count() const { return fields_.size(); }

  /// True when every J is +-1 and every h is 0 (the standard benchmark family,
  /// eligible for the bit-packed engine and the Delta = 2 gap convention).
  bool is_pm_one() const;
  /// True when all couplings and fields are integers.
  bool is_integral() const;

  Instance with_id(std::string id) const;

  friend bool operator==(const Instance& a, const Instance& b);

 private:
  std::shared_ptr<const ChimeraGraph> graph_;
  std::vector<Fixed> couplings_;
  std::vector<Fixed> fields_;
  std::string id_;
  std::uint64_t seed_;
};

/// Random +-1 couplings, one fair bit per edge (top bit of a 64-bit draw,
/// edges in graph().edges() order), zero fields.
Instance generate_instance(std::shared_ptr<const ChimeraGraph> graph, std::uint64_t seed,
                           std::string id = {});

/// Exact H(s). Throws sglab::Error on dimension mismatch.
Energy energy(const Instance& instance, const SpinConfig& config);

/// J'_ij = eta_i eta_j J_ij, h'_i = eta_i h_i.
Instance apply_gauge(const Instance& instance, const Gauge& gauge);
/// s'_i = eta_i s_i.
SpinConfig apply_gauge(const SpinConfig& config, const Gauge& gauge);

SpinConfig random_config(std::size_t n, Rng& rng);

/// Text form (see README "Instance files"). parse_instance throws
/// sglab::ParseError with the offending line.
std::string serialize_instance(const Instance& instance);
Instance parse_instance(std::string_view text);

Instance read_instance(const std::string& path);
void write_instance(const std::string& path, const Instance& instance);

/// Parses "RxCxK", e.g. "8x8x4".
std::shared_ptr<const ChimeraGraph> parse_graph_spec(std::string_view spec,
                                                     const std::set<VertexId>& dead = {});

}  // namespace sglab::chimera

namespace sglab::chimera {

/// Instance text plus an optional `config` section (used for witnesses).
struct InstanceDocument {
  Instance instance;
  std::optional<SpinConfig> config;
};

InstanceDocument parse_document(std::string_view text);
std::string serialize_document(const Instance& instance, const SpinConfig& config);

}  // namespace sglab::chimera
