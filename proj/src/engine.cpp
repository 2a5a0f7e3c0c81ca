#include "sglab/engine.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>

#include "sglab/error.hpp"

namespace sglab::engine {

// ---------------------------------------------------------------------------
// Word helpers

namespace {

inline Word256 operator^(Word256 a, Word256 b) { return {a.v ^ b.v}; }
inline Word256 operator&(Word256 a, Word256 b) { return {a.v & b.v}; }
inline Word256 operator|(Word256 a, Word256 b) { return {a.v | b.v}; }
inline Word256 operator~(Word256 a) { return {~a.v}; }
inline Word256& operator^=(Word256& a, Word256 b) { a.v ^= b.v; return a; }
inline Word256& operator|=(Word256& a, Word256 b) { a.v |= b.v; return a; }
inline Word256& operator&=(Word256& a, Word256 b) { a.v &= b.v; return a; }

template <class W>
W zero_word() {
  if constexpr (std::is_same_v<W, Word256>) return Word256{Word256::V{0, 0, 0, 0}};
  else return W{0};
}

template <class W>
bool any(W w) {
  if constexpr (std::is_same_v<W, Word256>) return (w.v[0] | w.v[1] | w.v[2] | w.v[3]) != 0;
  else return w != 0;
}

template <class W>
bool get_lane(W w, unsigned lane) {
  if constexpr (std::is_same_v<W, Word256>) return (w.v[lane >> 6] >> (lane & 63)) & 1u;
  else return (w >> lane) & 1u;
}

template <class W>
void set_lane(W& w, unsigned lane) {
  if constexpr (std::is_same_v<W, Word256>) w.v[lane >> 6] |= std::uint64_t{1} << (lane & 63);
  else w |= W{1} << lane;
}

double swap_log_ratio(const TemperatureLadder& ladder, std::uint32_t k, Energy lower, Energy upper) {
  return (1.0 / ladder[k] - 1.0 / ladder[k + 1]) * (lower - upper).to_double();
}

}  // namespace

// ---------------------------------------------------------------------------
// Ladder and acceptance

TemperatureLadder::TemperatureLadder(std::vector<double> temperatures) : t_(std::move(temperatures)) {
  if (t_.empty()) throw Error("temperature ladder is empty");
  if (t_.size() > 255) throw Error("temperature ladder longer than 255");
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (!(t_[i] > 0) || !std::isfinite(t_[i])) throw Error("temperatures must be positive and finite");
    if (i > 0 && !(t_[i] > t_[i - 1])) throw Error("temperatures must be strictly increasing");
  }
}

TemperatureLadder TemperatureLadder::evenly_spaced(double lo, double hi, std::size_t count) {
  if (count == 0) throw Error("ladder needs at least one temperature");
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i)
    t[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return TemperatureLadder(std::move(t));
}

TemperatureLadder default_ladder() {
  std::vector<double> t;
  for (int i = 0; i < 12; ++i) t.push_back(0.045 + (0.2 - 0.045) * i / 11.0);
  for (int i = 0; i < 18; ++i) t.push_back(0.21 + (1.632 - 0.21) * i / 17.0);
  t[11] = 0.2;
  t[29] = 1.632;
  return TemperatureLadder(std::move(t));
}

Acceptance exp_acceptance(double log_ratio) {
  if (log_ratio >= 0) return {true, 0};
  double p = std::exp(log_ratio);
  if (p >= 1.0) return {true, 0};
  return {false, static_cast<std::uint64_t>(std::ldexp(p, 64))};
}

Acceptance metropolis_acceptance(double delta_e, double temperature) {
  if (delta_e <= 0) return {true, 0};
  return exp_acceptance(-delta_e / temperature);
}

LaneSeeds lane_seeds(std::uint64_t seed, std::uint64_t lane) {
  return LaneSeeds{derive_seed(seed, StreamTag::swap, lane), derive_seed(seed, StreamTag::init, lane)};
}

std::uint64_t flip_seed(std::uint64_t seed, std::uint64_t lane, std::uint32_t lanes_per_word) {
  return derive_seed(seed, StreamTag::flip, lane / std::max<std::uint32_t>(lanes_per_word, 1));
}

// ---------------------------------------------------------------------------
// Scalar path

bool ReplicaSet::is_consistent() const {
  std::size_t n = static_cast<std::size_t>(replicas) * n_temps;
  if (configs.size() != n || energies.size() != n || temp_of_copy.size() != n || copy_at.size() != n) return false;
  for (std::uint32_t r = 0; r < replicas; ++r) {
    std::vector<bool> seen(n_temps, false);
    for (std::uint32_t j = 0; j < n_temps; ++j) {
      std::uint32_t c = r * n_temps + j;
      std::uint32_t t = temp_of_copy[c];
      if (t >= n_temps || seen[t]) return false;
      seen[t] = true;
      if (copy_at[r * n_temps + t] != c) return false;
    }
  }
  return true;
}

ReplicaSet init_replicas(const Instance& instance, std::uint32_t replicas, std::uint32_t n_temps, Rng& init) {
  ReplicaSet set;
  set.replicas = replicas;
  set.n_temps = n_temps;
  std::size_t n = static_cast<std::size_t>(replicas) * n_temps;
  set.configs.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    set.configs.push_back(chimera::random_config(instance.spin_count(), init));
    set.energies.push_back(chimera::energy(instance, set.configs.back()));
    set.temp_of_copy.push_back(static_cast<std::uint32_t>(c % n_temps));
    set.copy_at.push_back(static_cast<std::uint32_t>(c));
  }
  return set;
}

ScalarEngine::ScalarEngine(const Instance& instance, const TemperatureLadder& ladder)
    : instance_(&instance), ladder_(&ladder) {
  const auto& g = instance.graph();
  for (int color = 0; color < 2; ++color)
    for (std::uint32_t i = 0; i < g.vertex_count(); ++i)
      if (g.color(i) == color) order_.push_back(i);
  if (instance.is_integral()) {
    std::int64_t span = 0;
    for (std::uint32_t i = 0; i < g.vertex_count(); ++i) {
      std::int64_t s = std::abs(instance.fields()[i].raw() / Fixed::kScale);
      for (const auto& nb : g.neighbors(i)) s += std::abs(instance.couplings()[nb.edge].raw() / Fixed::kScale);
      span = std::max(span, 2 * s);
    }
    table_span_ = span;
    std::size_t width = static_cast<std::size_t>(2 * span + 1);
    table_.resize(width * ladder.size());
    for (std::size_t slot = 0; slot < ladder.size(); ++slot)
      for (std::int64_t d = -span; d <= span; ++d)
        table_[slot * width + static_cast<std::size_t>(d + span)] =
            metropolis_acceptance(static_cast<double>(d), ladder[slot]);
  }
}

Acceptance ScalarEngine::acceptance(std::uint32_t slot, std::int64_t delta_raw) const {
  if (table_span_ >= 0) {
    std::int64_t d = delta_raw / Fixed::kScale;
    return table_[slot * static_cast<std::size_t>(2 * table_span_ + 1) + static_cast<std::size_t>(d + table_span_)];
  }
  return metropolis_acceptance(Fixed::from_raw(delta_raw).to_double(), (*ladder_)[slot]);
}

template <class OnFlip>
bool ScalarEngine::sweep_visit(ReplicaSet& set, Rng& flip, OnFlip&& on_flip) const {
  const auto& g = instance_->graph();
  auto couplings = instance_->couplings();
  auto fields = instance_->fields();
  for (std::uint32_t r = 0; r < set.replicas; ++r) {
    for (std::uint32_t slot = 0; slot < set.n_temps; ++slot) {
      std::uint32_t c = set.copy_at[r * set.n_temps + slot];
      SpinConfig& s = set.configs[c];
      for (std::uint32_t i : order_) {
        std::uint64_t draw = flip();
        std::int64_t f = fields[i].raw();
        for (const auto& nb : g.neighbors(i)) f += couplings[nb.edge].raw() * s[nb.vertex];
        std::int64_t delta = -2 * s[i] * f;
        if (delta <= 0 || acceptance(slot, delta).accepts(draw)) {
          s.flip(i);
          set.energies[c] += Fixed::from_raw(delta);
          if (on_flip(c, set)) return true;
        }
      }
    }
  }
  return false;
}

void ScalarEngine::sweep(ReplicaSet& set, Rng& flip) const {
  sweep_visit(set, flip, [](std::uint32_t, const ReplicaSet&) { return false; });
}

void ScalarEngine::swap(ReplicaSet& set, Rng& swap, unsigned parity) const {
  for (std::uint32_t r = 0; r < set.replicas; ++r) {
    std::uint32_t* at = &set.copy_at[r * set.n_temps];
    for (std::uint32_t k = parity & 1u; k + 1 < set.n_temps; k += 2) {
      std::uint64_t draw = swap();
      std::uint32_t a = at[k], b = at[k + 1];
      if (exp_acceptance(swap_log_ratio(*ladder_, k, set.energies[a], set.energies[b])).accepts(draw)) {
        std::swap(at[k], at[k + 1]);
        set.temp_of_copy[a] = k + 1;
        set.temp_of_copy[b] = k;
      }
    }
  }
  assert(set.is_consistent());
}

void metropolis_sweep(ReplicaSet& set, const Instance& instance, const TemperatureLadder& ladder, Rng& flip) {
  ScalarEngine(instance, ladder).sweep(set, flip);
}

void pt_swap(ReplicaSet& set, const TemperatureLadder& ladder, Rng& swap, unsigned parity) {
  for (std::uint32_t r = 0; r < set.replicas; ++r) {
    std::uint32_t* at = &set.copy_at[r * set.n_temps];
    for (std::uint32_t k = parity & 1u; k + 1 < set.n_temps; k += 2) {
      std::uint64_t draw = swap();
      std::uint32_t a = at[k], b = at[k + 1];
      if (exp_acceptance(swap_log_ratio(ladder, k, set.energies[a], set.energies[b])).accepts(draw)) {
        std::swap(at[k], at[k + 1]);
        set.temp_of_copy[a] = k + 1;
        set.temp_of_copy[b] = k;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Packed path

template <class W>
PackedReplicaSet<W> pack(std::span<const ReplicaSet> lanes) {
  if (lanes.empty()) throw Error("pack needs at least one lane");
  if (lanes.size() > WordTraits<W>::kLanes) throw Error("more lanes than the word holds");
  PackedReplicaSet<W> p;
  p.lanes = static_cast<std::uint32_t>(lanes.size());
  p.replicas = lanes[0].replicas;
  p.n_temps = lanes[0].n_temps;
  p.n_spins = static_cast<std::uint32_t>(lanes[0].configs.empty() ? 0 : lanes[0].configs[0].size());
  std::size_t copies = static_cast<std::size_t>(p.replicas) * p.n_temps;
  for (const auto& l : lanes) {
    if (l.replicas != p.replicas || l.n_temps != p.n_temps || l.configs.size() != copies)
      throw Error("lanes disagree on replica layout");
    for (const auto& cfg : l.configs)
      if (cfg.size() != p.n_spins) throw Error("lanes disagree on spin count (mixed graphs)");
  }
  p.spins.assign(copies * p.n_spins, zero_word<W>());
  p.energies.resize(p.lanes * copies);
  p.copy_at.resize(p.lanes * copies);
  p.temp_of_copy.resize(p.lanes * copies);
  for (std::uint32_t lane = 0; lane < p.lanes; ++lane) {
    const ReplicaSet& l = lanes[lane];
    for (std::uint32_t c = 0; c < copies; ++c) {
      std::uint32_t r = c / p.n_temps;
      std::uint32_t slot = l.temp_of_copy[c];
      std::size_t word = (static_cast<std::size_t>(r) * p.n_temps + slot) * p.n_spins;
      for (std::uint32_t i = 0; i < p.n_spins; ++i)
        if (l.configs[c][i] < 0) set_lane(p.spins[word + i], lane);
      p.energies[lane * copies + r * p.n_temps + slot] = l.energies[c];
      p.temp_of_copy[lane * copies + c] = slot;
    }
    for (std::size_t j = 0; j < copies; ++j) p.copy_at[lane * copies + j] = l.copy_at[j];
  }
  return p;
}

template <class W>
std::vector<ReplicaSet> unpack(const PackedReplicaSet<W>& p) {
  std::size_t copies = static_cast<std::size_t>(p.replicas) * p.n_temps;
  std::vector<ReplicaSet> out(p.lanes);
  for (std::uint32_t lane = 0; lane < p.lanes; ++lane) {
    ReplicaSet& l = out[lane];
    l.replicas = p.replicas;
    l.n_temps = p.n_temps;
    l.configs.assign(copies, SpinConfig(p.n_spins));
    l.energies.resize(copies);
    l.temp_of_copy.resize(copies);
    l.copy_at.resize(copies);
    for (std::uint32_t c = 0; c < copies; ++c) {
      std::uint32_t r = c / p.n_temps;
      std::uint32_t slot = p.temp_of_copy[lane * copies + c];
      std::size_t word = (static_cast<std::size_t>(r) * p.n_temps + slot) * p.n_spins;
      for (std::uint32_t i = 0; i < p.n_spins; ++i)
        l.configs[c].set(i, get_lane(p.spins[word + i], lane) ? std::int8_t{-1} : std::int8_t{1});
      l.energies[c] = p.energies[lane * copies + r * p.n_temps + slot];
      l.temp_of_copy[c] = slot;
    }
    for (std::size_t j = 0; j < copies; ++j) l.copy_at[j] = p.copy_at[lane * copies + j];
  }
  return out;
}

template <class W>
PackedEngine<W>::PackedEngine(std::span<const Instance> lanes, const TemperatureLadder& ladder)
    : ladder_(&ladder), lane_mask_(zero_word<W>()) {
  if (lanes.empty()) throw Error("packed engine needs at least one lane");
  if (lanes.size() > WordTraits<W>::kLanes) throw Error("more lanes than the word holds");
  const auto& g = lanes[0].graph();
  for (const auto& inst : lanes) {
    if (!(inst.graph() == g)) throw Error("packed lanes must share one graph");
    if (!inst.is_pm_one()) throw Error("packed engine requires J = +-1 and h = 0 (instance '" + inst.id() + "')");
  }
  lanes_ = static_cast<std::uint32_t>(lanes.size());
  n_spins_ = static_cast<std::uint32_t>(g.vertex_count());
  n_edges_ = static_cast<std::uint32_t>(g.edges().size());
  max_degree_ = static_cast<std::uint32_t>(g.max_degree());
  if (max_degree_ > 15) throw Error("packed engine supports degree <= 15");
  for (std::uint32_t lane = 0; lane < lanes_; ++lane) set_lane(lane_mask_, lane);

  for (int color = 0; color < 2; ++color)
    for (std::uint32_t i = 0; i < n_spins_; ++i)
      if (g.color(i) == color) order_.push_back(i);
  sites_.resize(n_spins_);
  for (std::uint32_t i = 0; i < n_spins_; ++i) {
    auto nbs = g.neighbors(i);
    sites_[i] = Site{static_cast<std::uint32_t>(nbr_.size()), static_cast<std::uint32_t>(nbs.size())};
    for (const auto& nb : nbs) nbr_.emplace_back(nb.vertex, nb.edge);
  }
  for (std::size_t e = 0; e < n_edges_; ++e) edges_.push_back(g.edge_endpoints(e));
  jneg_.assign(n_edges_, zero_word<W>());
  for (std::uint32_t lane = 0; lane < lanes_; ++lane) {
    auto couplings = lanes[lane].couplings();
    for (std::size_t e = 0; e < n_edges_; ++e)
      if (couplings[e] < Fixed{}) set_lane(jneg_[e], lane);
  }
  std::size_t D = max_degree_ + 1;
  table_.resize(ladder.size() * D * D);
  for (std::size_t slot = 0; slot < ladder.size(); ++slot)
    for (std::size_t d = 0; d < D; ++d)
      for (std::size_t n = 0; n <= d; ++n)
        table_[(slot * D + d) * D + n] =
            metropolis_acceptance(2.0 * static_cast<double>(d) - 4.0 * static_cast<double>(n), ladder[slot]);
}

namespace {

// Lanes whose bit-sliced count (planes[0] = LSB) is >= c.
template <class W, int P>
W count_at_least(const W (&planes)[P], std::uint32_t c, W ones) {
  W gt = zero_word<W>();
  W eq = ones;
  for (int p = P - 1; p >= 0; --p) {
    if ((c >> p) & 1u) {
      eq &= planes[p];
    } else {
      gt |= eq & planes[p];
      eq &= ~planes[p];
    }
  }
  return gt | eq;
}

template <class W, int P>
void sweep_kernel(W* b, const std::vector<std::uint32_t>& order, const auto& sites, const auto& nbr,
                  const std::vector<W>& jneg, W lane_mask, const Acceptance* tab, std::size_t D, Rng& flip) {
  for (std::uint32_t i : order) {
    std::uint64_t draw = flip();
    const auto& site = sites[i];
    const Acceptance* row = tab + site.degree * D;
    std::uint32_t ell = 0;
    while (!row[ell].accepts(draw)) ++ell;  // row[d'] with n_pos >= d/2 always accepts
    if (ell == 0) {
      b[i] ^= lane_mask;
      continue;
    }
    W planes[P];
    for (int p = 0; p < P; ++p) planes[p] = zero_word<W>();
    W bi = b[i];
    for (std::uint32_t k = 0; k < site.degree; ++k) {
      auto [j, e] = nbr[site.begin + k];
      W carry = ~(bi ^ b[j] ^ jneg[e]);
      for (int p = 0; p < P; ++p) {
        W t = planes[p] & carry;
        planes[p] ^= carry;
        carry = t;
      }
    }
    b[i] ^= count_at_least<W, P>(planes, ell, lane_mask) & lane_mask;
  }
}

}  // namespace

template <class W>
void PackedEngine<W>::sweep(PackedReplicaSet<W>& set, Rng& flip) const {
  std::size_t D = max_degree_ + 1;
  for (std::uint32_t r = 0; r < set.replicas; ++r)
    for (std::uint32_t slot = 0; slot < set.n_temps; ++slot) {
      W* b = &set.spins[(static_cast<std::size_t>(r) * set.n_temps + slot) * n_spins_];
      const Acceptance* tab = &table_[slot * D * D];
      if (max_degree_ <= 7)
        sweep_kernel<W, 3>(b, order_, sites_, nbr_, jneg_, lane_mask_, tab, D, flip);
      else
        sweep_kernel<W, 4>(b, order_, sites_, nbr_, jneg_, lane_mask_, tab, D, flip);
    }
}

template <class W>
void PackedEngine<W>::compute_energies(PackedReplicaSet<W>& set) const {
  constexpr int kMaxPlanes = 24;
  int planes_needed = std::max(1, static_cast<int>(std::bit_width(n_edges_)));
  if (planes_needed > kMaxPlanes) throw Error("too many edges for the packed energy counter");
  std::size_t copies = static_cast<std::size_t>(set.replicas) * set.n_temps;
  for (std::uint32_t r = 0; r < set.replicas; ++r)
    for (std::uint32_t slot = 0; slot < set.n_temps; ++slot) {
      const W* b = &set.spins[(static_cast<std::size_t>(r) * set.n_temps + slot) * n_spins_];
      W planes[kMaxPlanes];
      for (int p = 0; p < planes_needed; ++p) planes[p] = zero_word<W>();
      for (std::uint32_t e = 0; e < n_edges_; ++e) {
        W carry = ~(b[edges_[e].first] ^ b[edges_[e].second] ^ jneg_[e]) & lane_mask_;
        for (int p = 0; p < planes_needed && any(carry); ++p) {
          W t = planes[p] & carry;
          planes[p] ^= carry;
          carry = t;
        }
      }
      for (std::uint32_t lane = 0; lane < lanes_; ++lane) {
        std::int64_t count = 0;
        for (int p = 0; p < planes_needed; ++p)
          if (get_lane(planes[p], lane)) count |= std::int64_t{1} << p;
        set.energies[lane * copies + r * set.n_temps + slot] =
            Fixed::from_int(2 * count - static_cast<std::int64_t>(n_edges_));
      }
    }
}

template <class W>
void PackedEngine<W>::swap(PackedReplicaSet<W>& set, std::span<Rng> swap_streams, unsigned parity) const {
  std::size_t copies = static_cast<std::size_t>(set.replicas) * set.n_temps;
  for (std::uint32_t r = 0; r < set.replicas; ++r)
    for (std::uint32_t k = parity & 1u; k + 1 < set.n_temps; k += 2) {
      W mask = zero_word<W>();
      bool any_swap = false;
      for (std::uint32_t lane = 0; lane < lanes_; ++lane) {
        std::uint64_t draw = swap_streams[lane]();
        std::size_t lo = lane * copies + r * set.n_temps + k;
        if (exp_acceptance(swap_log_ratio(*ladder_, k, set.energies[lo], set.energies[lo + 1])).accepts(draw)) {
          set_lane(mask, lane);
          any_swap = true;
          std::swap(set.energies[lo], set.energies[lo + 1]);
          std::swap(set.copy_at[lo], set.copy_at[lo + 1]);
          set.temp_of_copy[lane * copies + set.copy_at[lo]] = k;
          set.temp_of_copy[lane * copies + set.copy_at[lo + 1]] = k + 1;
        }
      }
      if (!any_swap) continue;
      W* a = &set.spins[(static_cast<std::size_t>(r) * set.n_temps + k) * n_spins_];
      W* c = a + n_spins_;
      for (std::uint32_t i = 0; i < n_spins_; ++i) {
        W diff = (a[i] ^ c[i]) & mask;
        a[i] ^= diff;
        c[i] ^= diff;
      }
    }
}

template PackedReplicaSet<std::uint64_t> pack<std::uint64_t>(std::span<const ReplicaSet>);
template PackedReplicaSet<Word256> pack<Word256>(std::span<const ReplicaSet>);
template std::vector<ReplicaSet> unpack<std::uint64_t>(const PackedReplicaSet<std::uint64_t>&);
template std::vector<ReplicaSet> unpack<Word256>(const PackedReplicaSet<Word256>&);
template class PackedEngine<std::uint64_t>;
template class PackedEngine<Word256>;

// ---------------------------------------------------------------------------
// Run drivers

void RunConfig::validate() const {
  if (sweeps_per_step == 0) throw Error("sweeps_per_step must be positive");
  if (replicas == 0) throw Error("replicas must be positive");
  if (trace_stride == 0) throw Error("trace_stride must be positive");
  if (lanes_per_word == 0 || lanes_per_word > 256) throw Error("lanes_per_word must be in 1..256");
  if (store_configs && checkpoints > 0 && steps > 0 && steps % checkpoints != 0)
    throw Error("steps must be divisible by checkpoints when storing configurations");
}

namespace {

// Per-lane bookkeeping shared by both paths. A View exposes:
//   energy(r, slot), copy(r, slot), slot_of(copy), config(r, slot)
template <class View>
class Recorder {
 public:
  Recorder(RunOutput& out, const RunConfig& cfg, std::uint32_t n_temps) : out_(out), cfg_(cfg), n_temps_(n_temps) {
    std::uint32_t copies = cfg.replicas * n_temps;
    if (cfg.record_traces) {
      out_.traces.resize(copies);
      for (std::uint32_t c = 0; c < copies; ++c) {
        out_.traces[c].copy = c;
        out_.traces[c].n_temps = n_temps;
        out_.traces[c].sweeps_per_sample = std::uint64_t{cfg.sweeps_per_step} * cfg.trace_stride;
        out_.traces[c].indices.reserve(cfg.steps / cfg.trace_stride);
      }
    }
    if (cfg.record_energies) {
      out_.energy_series.resize(n_temps);
      for (auto& s : out_.energy_series) s.reserve(cfg.steps / cfg.trace_stride);
    }
    out_.min_energy = kInfiniteEnergy;
  }

  void track_minimum(const View& v) {
    for (std::uint32_t r = 0; r < cfg_.replicas; ++r)
      for (std::uint32_t k = 0; k < n_temps_; ++k) {
        Energy e = v.energy(r, k);
        if (e < out_.min_energy) {
          out_.min_energy = e;
          out_.min_config = v.config(r, k);
        }
      }
  }

  void after_step(const View& v, std::uint64_t step) {
    if (step % cfg_.trace_stride == 0) {
      if (cfg_.record_traces)
        for (auto& t : out_.traces) t.indices.push_back(static_cast<std::uint8_t>(v.slot_of(t.copy) + 1));
      if (cfg_.record_energies)
        for (std::uint32_t k = 0; k < n_temps_; ++k) {
          double sum = 0;
          for (std::uint32_t r = 0; r < cfg_.replicas; ++r) sum += v.energy(r, k).to_double();
          out_.energy_series[k].push_back(sum / cfg_.replicas);
        }
    }
    if (cfg_.store_configs && cfg_.checkpoints > 0 && step > 0 && step % (cfg_.steps / cfg_.checkpoints) == 0)
      snapshot(v, static_cast<std::uint32_t>(step / (cfg_.steps / cfg_.checkpoints) - 1), step);
  }

  void snapshot(const View& v, std::uint32_t checkpoint, std::uint64_t step) {
    for (std::uint32_t r = 0; r < cfg_.replicas; ++r)
      for (std::uint32_t k = 0; k < n_temps_; ++k)
        out_.snapshots.push_back(Snapshot{checkpoint, step, r, k, v.copy(r, k), v.energy(r, k), v.config(r, k)});
  }

 private:
  RunOutput& out_;
  const RunConfig& cfg_;
  std::uint32_t n_temps_;
};

struct ScalarView {
  const ReplicaSet* set;
  Energy energy(std::uint32_t r, std::uint32_t k) const { return set->energies[copy(r, k)]; }
  std::uint32_t copy(std::uint32_t r, std::uint32_t k) const { return set->copy_at[r * set->n_temps + k]; }
  std::uint32_t slot_of(std::uint32_t c) const { return set->temp_of_copy[c]; }
  SpinConfig config(std::uint32_t r, std::uint32_t k) const { return set->configs[copy(r, k)]; }
};

template <class W>
struct PackedView {
  const PackedReplicaSet<W>* set;
  std::uint32_t lane;
  std::size_t base(std::uint32_t r, std::uint32_t k) const {
    return lane * static_cast<std::size_t>(set->replicas) * set->n_temps + r * set->n_temps + k;
  }
  Energy energy(std::uint32_t r, std::uint32_t k) const { return set->energies[base(r, k)]; }
  std::uint32_t copy(std::uint32_t r, std::uint32_t k) const { return set->copy_at[base(r, k)]; }
  std::uint32_t slot_of(std::uint32_t c) const {
    return set->temp_of_copy[lane * static_cast<std::size_t>(set->replicas) * set->n_temps + c];
  }
  SpinConfig config(std::uint32_t r, std::uint32_t k) const {
    SpinConfig s(set->n_spins);
    const W* b = &set->spins[(static_cast<std::size_t>(r) * set->n_temps + k) * set->n_spins];
    for (std::uint32_t i = 0; i < set->n_spins; ++i)
      if (get_lane(b[i], lane)) s.set(i, -1);
    return s;
  }
};

RunOutput make_output(const Instance& inst, const TemperatureLadder& ladder, const RunConfig& cfg) {
  RunOutput out;
  out.instance_id = inst.id();
  out.seed = cfg.seed;
  out.ladder = ladder.temperatures();
  out.replicas = cfg.replicas;
  out.steps = cfg.steps;
  out.sweeps_per_step = cfg.sweeps_per_step;
  out.trace_stride = cfg.trace_stride;
  return out;
}

RunOutput run_scalar(const Instance& inst, const TemperatureLadder& ladder, const RunConfig& cfg,
                     std::uint64_t flip_seed_value, LaneSeeds seeds) {
  RunOutput out = make_output(inst, ladder, cfg);
  auto n_temps = static_cast<std::uint32_t>(ladder.size());
  Rng init(seeds.init), flip(flip_seed_value), swap(seeds.swap);
  ReplicaSet set = init_replicas(inst, cfg.replicas, n_temps, init);
  ScalarEngine engine(inst, ladder);
  ScalarView view{&set};
  Recorder<ScalarView> rec(out, cfg, n_temps);
  rec.track_minimum(view);
  if (cfg.steps == 0 && cfg.store_configs && cfg.checkpoints > 0) rec.snapshot(view, 0, 0);
  for (std::uint64_t step = 1; step <= cfg.steps; ++step) {
    for (std::uint32_t s = 0; s < cfg.sweeps_per_step; ++s) engine.sweep(set, flip);
    rec.track_minimum(view);
    engine.swap(set, swap, static_cast<unsigned>((step - 1) & 1u));
    rec.after_step(view, step);
  }
  out.final_state = std::move(set);
  return out;
}

template <class W>
std::vector<RunOutput> run_packed_group(std::span<const Instance> group, const TemperatureLadder& ladder,
                                        const RunConfig& cfg, std::uint64_t flip_seed_value,
                                        std::span<const LaneSeeds> seeds) {
  auto n_temps = static_cast<std::uint32_t>(ladder.size());
  std::vector<ReplicaSet> scalar;
  std::vector<Rng> swaps;
  for (std::size_t lane = 0; lane < group.size(); ++lane) {
    Rng init(seeds[lane].init);
    scalar.push_back(init_replicas(group[lane], cfg.replicas, n_temps, init));
    swaps.emplace_back(seeds[lane].swap);
  }
  PackedReplicaSet<W> set = pack<W>(scalar);
  scalar.clear();
  PackedEngine<W> engine(group, ladder);
  Rng flip(flip_seed_value);

  std::vector<RunOutput> outs;
  std::vector<Recorder<PackedView<W>>> recs;
  std::vector<PackedView<W>> views;
  outs.reserve(group.size());
  for (std::size_t lane = 0; lane < group.size(); ++lane) {
    outs.push_back(make_output(group[lane], ladder, cfg));
    views.push_back(PackedView<W>{&set, static_cast<std::uint32_t>(lane)});
  }
  recs.reserve(group.size());
  for (std::size_t lane = 0; lane < group.size(); ++lane) recs.emplace_back(outs[lane], cfg, n_temps);
  for (std::size_t lane = 0; lane < group.size(); ++lane) {
    recs[lane].track_minimum(views[lane]);
    if (cfg.steps == 0 && cfg.store_configs && cfg.checkpoints > 0) recs[lane].snapshot(views[lane], 0, 0);
  }
  for (std::uint64_t step = 1; step <= cfg.steps; ++step) {
    for (std::uint32_t s = 0; s < cfg.sweeps_per_step; ++s) engine.sweep(set, flip);
    engine.compute_energies(set);
    for (std::size_t lane = 0; lane < group.size(); ++lane) recs[lane].track_minimum(views[lane]);
    engine.swap(set, swaps, static_cast<unsigned>((step - 1) & 1u));
    for (std::size_t lane = 0; lane < group.size(); ++lane) recs[lane].after_step(views[lane], step);
  }
  auto finals = unpack(set);
  for (std::size_t lane = 0; lane < group.size(); ++lane) outs[lane].final_state = std::move(finals[lane]);
  return outs;
}

bool packable(std::span<const Instance> instances) {
  if (instances.empty()) return false;
  for (const auto& inst : instances)
    if (!inst.is_pm_one() || !(inst.graph() == instances[0].graph()) || inst.graph().max_degree() > 15) return false;
  return true;
}

}  // namespace

std::vector<RunOutput> run(std::span<const Instance> instances, const TemperatureLadder& ladder,
                           const RunConfig& config) {
  config.validate();
  std::vector<RunOutput> outs;
  if (instances.empty()) return outs;
  bool packed = config.path == EnginePath::packed ||
                (config.path == EnginePath::automatic && packable(instances));
  if (packed && !packable(instances))
    throw Error("packed path requested for instances that are not +-J, h = 0 on one graph");
  std::uint32_t lpw = config.lanes_per_word;
  if (!packed) {
    for (std::size_t n = 0; n < instances.size(); ++n)
      outs.push_back(run_scalar(instances[n], ladder, config, flip_seed(config.seed, n, lpw),
                                lane_seeds(config.seed, n)));
    return outs;
  }
  for (std::size_t start = 0; start < instances.size(); start += lpw) {
    std::size_t count = std::min<std::size_t>(lpw, instances.size() - start);
    std::vector<LaneSeeds> seeds;
    for (std::size_t n = start; n < start + count; ++n) seeds.push_back(lane_seeds(config.seed, n));
    auto group = instances.subspan(start, count);
    std::uint64_t fs = flip_seed(config.seed, start, lpw);
    auto part = lpw <= 64 ? run_packed_group<std::uint64_t>(group, ladder, config, fs, seeds)
                          : run_packed_group<Word256>(group, ladder, config, fs, seeds);
    for (auto& o : part) outs.push_back(std::move(o));
  }
  return outs;
}

RunOutput run(const Instance& instance, const TemperatureLadder& ladder, const RunConfig& config) {
  return std::move(run(std::span<const Instance>(&instance, 1), ladder, config).front());
}

// ---------------------------------------------------------------------------
// Heuristic mode

std::optional<std::uint64_t> run_heuristic(const Instance& instance, const TemperatureLadder& ladder,
                                           Energy target, const HeuristicConfig& config) {
  if (config.sweeps_per_step == 0 || config.replicas == 0) throw Error("heuristic budget must be positive");
  auto n_temps = static_cast<std::uint32_t>(ladder.size());
  LaneSeeds seeds = lane_seeds(config.seed, 0);
  Rng init(seeds.init), flip(flip_seed(config.seed, 0, 1)), swap(seeds.swap);
  ReplicaSet set = init_replicas(instance, config.replicas, n_temps, init);
  for (Energy e : set.energies)
    if (e <= target) return 0;
  ScalarEngine engine(instance, ladder);
  std::uint64_t sweeps = 0;
  auto hit = [&](std::uint32_t c, const ReplicaSet& s) { return s.energies[c] <= target; };
  for (std::uint64_t step = 1; step <= config.max_steps; ++step) {
    for (std::uint32_t k = 0; k < config.sweeps_per_step; ++k) {
      ++sweeps;
      if (engine.sweep_visit(set, flip, hit)) return sweeps;
    }
    engine.swap(set, swap, static_cast<unsigned>((step - 1) & 1u));
  }
  return std::nullopt;
}

BestFound solve_best(const Instance& instance, const TemperatureLadder& ladder, const HeuristicConfig& config) {
  if (config.sweeps_per_step == 0 || config.replicas == 0) throw Error("heuristic budget must be positive");
  auto n_temps = static_cast<std::uint32_t>(ladder.size());
  LaneSeeds seeds = lane_seeds(config.seed, 0);
  Rng init(seeds.init), flip(flip_seed(config.seed, 0, 1)), swap(seeds.swap);
  ReplicaSet set = init_replicas(instance, config.replicas, n_temps, init);
  BestFound best{kInfiniteEnergy, {}, 0};
  for (std::size_t c = 0; c < set.configs.size(); ++c)
    if (set.energies[c] < best.energy) best = BestFound{set.energies[c], set.configs[c], 0};
  ScalarEngine engine(instance, ladder);
  std::uint64_t sweeps = 0;
  auto track = [&](std::uint32_t c, const ReplicaSet& s) {
    if (s.energies[c] < best.energy) {
      best.energy = s.energies[c];
      best.config = s.configs[c];
      best.sweeps_to_best = sweeps;
    }
    return false;
  };
  for (std::uint64_t step = 1; step <= config.max_steps; ++step) {
    for (std::uint32_t k = 0; k < config.sweeps_per_step; ++k) {
      ++sweeps;
      engine.sweep_visit(set, flip, track);
    }
    engine.swap(set, swap, static_cast<unsigned>((step - 1) & 1u));
  }
  return best;
}

}  // namespace sglab::engine
