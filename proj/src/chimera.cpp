#include "sglab/chimera.hpp"

#include <algorithm>

#include "sglab/error.hpp"

namespace sglab::chimera {

ChimeraGraph::ChimeraGraph(int rows, int cols, int half_size, std::set<VertexId> dead)
    : rows_(rows), cols_(cols), k_(half_size), dead_(std::move(dead)) {
  if (rows < 1 || cols < 1 || half_size < 1)
    throw Error("chimera dimensions must be positive");
  const std::size_t ideal = ideal_vertex_count();
  if (ideal > (1u << 30)) throw Error("chimera graph too large");
  for (VertexId v : dead_)
    if (v >= ideal)
      throw Error("dead vertex " + std::to_string(v) + " outside ideal range [0, " +
                  std::to_string(ideal) + ")");

  index_of_.assign(ideal, -1);
  for (VertexId v = 0; v < ideal; ++v) {
    if (dead_.contains(v)) continue;
    index_of_[v] = static_cast<std::int32_t>(active_.size());
    active_.push_back(v);
  }

  auto add = [&](VertexId a, VertexId b) {
    if (dead_.contains(a) || dead_.contains(b)) return;
    edges_.push_back(Edge{std::min(a, b), std::max(a, b)});
  };
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      for (int u = 0; u < k_; ++u) {
        for (int w = 0; w < k_; ++w) add(vertex_id(r, c, 0, u), vertex_id(r, c, 1, w));
        if (r + 1 < rows_) add(vertex_id(r, c, 0, u), vertex_id(r + 1, c, 0, u));
        if (c + 1 < cols_) add(vertex_id(r, c, 1, u), vertex_id(r, c + 1, 1, u));
      }
  std::sort(edges_.begin(), edges_.end());

  std::vector<std::uint32_t> degree(active_.size(), 0);
  local_edges_.reserve(edges_.size());
  for (const Edge& e : edges_) {
    auto a = static_cast<std::uint32_t>(index_of_[e.u]);
    auto b = static_cast<std::uint32_t>(index_of_[e.v]);
    local_edges_.emplace_back(a, b);
    ++degree[a];
    ++degree[b];
  }
  adj_offsets_.assign(active_.size() + 1, 0);
  for (std::size_t i = 0; i < active_.size(); ++i) adj_offsets_[i + 1] = adj_offsets_[i] + degree[i];
  adj_.resize(adj_offsets_.back());
  std::vector<std::uint32_t> fill(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (std::size_t e = 0; e < local_edges_.size(); ++e) {
    auto [a, b] = local_edges_[e];
    adj_[fill[a]++] = Neighbor{b, static_cast<std::uint32_t>(e)};
    adj_[fill[b]++] = Neighbor{a, static_cast<std::uint32_t>(e)};
  }

  colors_.resize(active_.size());
  for (std::size_t i = 0; i < active_.size(); ++i) {
    VertexCoord c = coord(active_[i]);
    colors_[i] = static_cast<std::uint8_t>((c.row + c.col + c.half) & 1);
  }
}

std::size_t ChimeraGraph::ideal_vertex_count() const {
  return 2u * static_cast<std::size_t>(k_) * static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_);
}

std::size_t ChimeraGraph::ideal_edge_count() const {
  auto r = static_cast<std::size_t>(rows_), c = static_cast<std::size_t>(cols_), k = static_cast<std::size_t>(k_);
  return k * k * r * c + k * r * (c - 1) + k * c * (r - 1);
}

std::optional<std::uint32_t> ChimeraGraph::index_of(VertexId v) const {
  if (v >= index_of_.size() || index_of_[v] < 0) return std::nullopt;
  return static_cast<std::uint32_t>(index_of_[v]);
}

std::optional<std::size_t> ChimeraGraph::edge_index(VertexId a, VertexId b) const {
  Edge key{std::min(a, b), std::max(a, b)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::span<const Neighbor> ChimeraGraph::neighbors(std::uint32_t index) const {
  return std::span<const Neighbor>(adj_.data() + adj_offsets_[index], adj_offsets_[index + 1] - adj_offsets_[index]);
}

std::size_t ChimeraGraph::max_degree() const {
  std::size_t m = 0;
  for (std::size_t i = 0; i < active_.size(); ++i) m = std::max<std::size_t>(m, adj_offsets_[i + 1] - adj_offsets_[i]);
  return m;
}

VertexCoord ChimeraGraph::coord(VertexId v) const {
  VertexCoord c;
  c.unit = static_cast<int>(v % static_cast<VertexId>(k_));
  VertexId rest = v / static_cast<VertexId>(k_);
  c.half = static_cast<int>(rest % 2);
  VertexId cell = rest / 2;
  c.row = static_cast<int>(cell / static_cast<VertexId>(cols_));
  c.col = static_cast<int>(cell % static_cast<VertexId>(cols_));
  return c;
}

VertexId ChimeraGraph::vertex_id(int row, int col, int half, int unit) const {
  return static_cast<VertexId>(((row * cols_ + col) * 2 + half) * k_ + unit);
}

std::shared_ptr<const ChimeraGraph> build_chimera(int rows, int cols, int k, const std::set<VertexId>& dead) {
  return std::make_shared<const ChimeraGraph>(rows, cols, k, dead);
}

SpinConfig::SpinConfig(std::vector<std::int8_t> values) : s_(std::move(values)) {
  for (auto v : s_)
    if (v != 1 && v != -1) throw Error("spin values must be +1 or -1");
}

SpinConfig SpinConfig::flipped() const {
  SpinConfig out = *this;
  for (auto& v : out.s_) v = static_cast<std::int8_t>(-v);
  return out;
}

std::string SpinConfig::to_string() const {
  std::string out(s_.size(), '+');
  for (std::size_t i = 0; i < s_.size(); ++i)
    if (s_[i] < 0) out[i] = '-';
  return out;
}

std::optional<SpinConfig> SpinConfig::parse(std::string_view text) {
  std::vector<std::int8_t> v;
  v.reserve(text.size());
  for (char c : text) {
    if (c == '+') v.push_back(1);
    else if (c == '-') v.push_back(-1);
    else return std::nullopt;
  }
  return SpinConfig(std::move(v));
}

Gauge::Gauge(std::vector<std::int8_t> eta) : eta_(std::move(eta)) {
  for (auto v : eta_)
    if (v != 1 && v != -1) throw Error("gauge entries must be +1 or -1");
}

Gauge Gauge::random(std::size_t n, Rng& rng) {
  std::vector<std::int8_t> eta(n);
  for (auto& v : eta) v = (rng() >> 63) ? std::int8_t{-1} : std::int8_t{1};
  return Gauge(std::move(eta));
}

Instance::Instance(std::shared_ptr<const ChimeraGraph> graph, std::vector<Fixed> couplings,
                   std::vector<Fixed> fields, std::string id, std::uint64_t seed)
    : graph_(std::move(graph)), couplings_(std::move(couplings)), fields_(std::move(fields)),
      id_(std::move(id)), seed_(seed) {
  if (!graph_) throw Error("instance without graph");
  if (couplings_.size() != graph_->edges().size())
    throw Error("instance needs exactly one coupling per active edge");
  if (fields_.size() != graph_->vertex_count())
    throw Error("instance needs exactly one field per active vertex");
}

bool Instance::is_pm_one() const {
  for (Fixed j : couplings_)
    if (j != Fixed::from_int(1) && j != Fixed::from_int(-1)) return false;
  for (Fixed h : fields_)
    if (h != Fixed{}) return false;
  return true;
}

bool Instance::is_integral() const {
  for (Fixed j : couplings_)
    if (!j.is_integer()) return false;
  for (Fixed h : fields_)
    if (!h.is_integer()) return false;
  return true;
}

Instance Instance::with_id(std::string id) const {
  Instance out = *this;
  out.id_ = std::move(id);
  return out;
}

bool operator==(const Instance& a, const Instance& b) {
  return *a.graph_ == *b.graph_ && a.couplings_ == b.couplings_ && a.fields_ == b.fields_ &&
         a.id_ == b.id_ && a.seed_ == b.seed_;
}

Instance generate_instance(std::shared_ptr<const ChimeraGraph> graph, std::uint64_t seed, std::string id) {
  Rng rng(seed);
  std::vector<Fixed> couplings(graph->edges().size());
  for (auto& j : couplings) j = Fixed::from_int((rng() >> 63) ? 1 : -1);
  std::vector<Fixed> fields(graph->vertex_count());
  return Instance(std::move(graph), std::move(couplings), std::move(fields), std::move(id), seed);
}

Energy energy(const Instance& instance, const SpinConfig& config) {
  const auto& g = instance.graph();
  if (config.size() != g.vertex_count())
    throw Error("configuration has " + std::to_string(config.size()) + " spins, instance has " +
                std::to_string(g.vertex_count()));
  Energy e;
  auto couplings = instance.couplings();
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    auto [a, b] = g.edge_endpoints(k);
    e += couplings[k] * (config[a] * config[b]);
  }
  auto fields = instance.fields();
  for (std::size_t i = 0; i < fields.size(); ++i) e += fields[i] * config[i];
  return e;
}

Instance apply_gauge(const Instance& instance, const Gauge& gauge) {
  const auto& g = instance.graph();
  if (gauge.size() != g.vertex_count()) throw Error("gauge dimension does not match instance");
  std::vector<Fixed> couplings(instance.couplings().begin(), instance.couplings().end());
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    auto [a, b] = g.edge_endpoints(k);
    couplings[k] = couplings[k] * (gauge[a] * gauge[b]);
  }
  std::vector<Fixed> fields(instance.fields().begin(), instance.fields().end());
  for (std::size_t i = 0; i < fields.size(); ++i) fields[i] = fields[i] * gauge[i];
  return Instance(instance.graph_ptr(), std::move(couplings), std::move(fields), instance.id(), instance.seed());
}

SpinConfig apply_gauge(const SpinConfig& config, const Gauge& gauge) {
  if (gauge.size() != config.size()) throw Error("gauge dimension does not match configuration");
  std::vector<std::int8_t> s(config.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::int8_t>(config[i] * gauge[i]);
  return SpinConfig(std::move(s));
}

SpinConfig random_config(std::size_t n, Rng& rng) {
  std::vector<std::int8_t> s(n);
  for (auto& v : s) v = (rng() >> 63) ? std::int8_t{-1} : std::int8_t{1};
  return SpinConfig(std::move(s));
}

}  // namespace sglab::chimera
