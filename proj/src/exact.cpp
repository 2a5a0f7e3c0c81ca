#include "sglab/exact.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <limits>
#include <memory>

#include "sglab/error.hpp"
#include "sglab/table.hpp"

namespace sglab::exact {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
constexpr std::uint64_t kCountMax = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > kCountMax - b ? kCountMax : a + b; }
std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a > kCountMax / b ? kCountMax : a * b;
}

// Min with multiplicity: (value, count).
struct MinCount {
  std::int64_t value = kInf;
  std::uint64_t count = 0;
  void offer(std::int64_t v, std::uint64_t c) {
    if (v < value) {
      value = v;
      count = c;
    } else if (v == value) {
      count = sat_add(count, c);
    }
  }
};

// Local fields h_i + sum_j J_ij s_j in raw fixed-point units.
std::vector<std::int64_t> local_fields(const Instance& inst, const SpinConfig& s) {
  const auto& g = inst.graph();
  std::vector<std::int64_t> f(inst.spin_count());
  for (std::uint32_t i = 0; i < f.size(); ++i) {
    f[i] = inst.fields()[i].raw();
    for (const auto& nb : g.neighbors(i)) f[i] += inst.couplings()[nb.edge].raw() * s[nb.vertex];
  }
  return f;
}

ExactResult brute_full(const Instance& inst) {
  const auto& g = inst.graph();
  std::size_t n = inst.spin_count();
  if (n > 30) throw Error("full enumeration limited to 30 spins (got " + std::to_string(n) + ")");
  ExactResult best;
  if (n == 0) {
    best.e0 = Energy{};
    best.degeneracy = 1;
    return best;
  }
  bool symmetric = std::all_of(inst.fields().begin(), inst.fields().end(), [](Fixed h) { return h == Fixed{}; });
  // With h = 0 the last spin stays +1 and every count doubles.
  std::size_t free_bits = symmetric ? n - 1 : n;
  SpinConfig s(n);
  std::int64_t e = chimera::energy(inst, s).raw();
  std::vector<std::int64_t> f = local_fields(inst, s);
  std::int64_t best_e = e;
  std::uint64_t count = 1;
  SpinConfig witness = s;
  std::uint64_t total = std::uint64_t{1} << free_bits;
  for (std::uint64_t step = 1; step < total; ++step) {
    auto i = static_cast<std::uint32_t>(std::countr_zero(step));
    std::int64_t si = s[i];
    e += -2 * si * f[i];
    s.flip(i);
    for (const auto& nb : g.neighbors(i)) f[nb.vertex] += -2 * si * inst.couplings()[nb.edge].raw();
    if (e < best_e) {
      best_e = e;
      count = 1;
      witness = s;
    } else if (e == best_e) {
      ++count;
    }
  }
  best.e0 = Fixed::from_raw(best_e);
  best.degeneracy = symmetric ? count * 2 : count;
  best.witness = witness;
  return best;
}

ExactResult brute_bipartite(const Instance& inst) {
  const auto& g = inst.graph();
  std::size_t n = inst.spin_count();
  if (n > 32) throw Error("brute force limited to 32 spins (got " + std::to_string(n) + ")");
  std::vector<std::uint32_t> cls[2];
  for (std::uint32_t i = 0; i < n; ++i) cls[g.color(i)].push_back(i);
  const auto& enumerated = cls[0].size() <= cls[1].size() ? cls[0] : cls[1];
  const auto& minimized = cls[0].size() <= cls[1].size() ? cls[1] : cls[0];
  if (enumerated.size() > 30) throw Error("bipartition class too large to enumerate");

  // All enumerated spins start at +1; minimized spins see field f_j and take
  // the sign opposing it, contributing -|f_j| (ties leave a free spin).
  SpinConfig s(n);
  std::vector<std::int64_t> f = local_fields(inst, s);
  std::int64_t enum_part = 0;  // sum of h_i s_i over enumerated spins
  for (auto i : enumerated) enum_part += inst.fields()[i].raw();
  std::int64_t abs_sum = 0;
  std::uint32_t zeros = 0;
  for (auto j : minimized) {
    abs_sum += std::abs(f[j]);
    zeros += f[j] == 0;
  }
  std::int64_t best_e = enum_part - abs_sum;
  std::uint64_t count = std::uint64_t{1} << zeros;
  SpinConfig best_enum = s;
  std::uint64_t total = std::uint64_t{1} << enumerated.size();
  for (std::uint64_t step = 1; step < total; ++step) {
    std::uint32_t i = enumerated[static_cast<std::size_t>(std::countr_zero(step))];
    std::int64_t si = s[i];
    s.flip(i);
    enum_part -= 2 * si * inst.fields()[i].raw();
    for (const auto& nb : g.neighbors(i)) {
      std::int64_t& fj = f[nb.vertex];
      abs_sum -= std::abs(fj);
      zeros -= fj == 0;
      fj += -2 * si * inst.couplings()[nb.edge].raw();
      abs_sum += std::abs(fj);
      zeros += fj == 0;
    }
    std::int64_t e = enum_part - abs_sum;
    if (e < best_e) {
      best_e = e;
      count = std::uint64_t{1} << zeros;
      best_enum = s;
    } else if (e == best_e) {
      count = sat_add(count, std::uint64_t{1} << zeros);
    }
  }
  ExactResult r;
  r.e0 = Fixed::from_raw(best_e);
  r.degeneracy = count;
  r.degeneracy_saturated = count == kCountMax;
  SpinConfig w = best_enum;
  std::vector<std::int64_t> wf = local_fields(inst, w);
  for (auto j : minimized) w.set(j, wf[j] > 0 ? std::int8_t{-1} : std::int8_t{1});
  r.witness = std::move(w);
  return r;
}

}  // namespace

ExactResult brute_force(const Instance& instance, BruteForceMethod method) {
  std::size_t n = instance.spin_count();
  if (n > 32) throw Error("brute force limited to 32 spins (got " + std::to_string(n) + ")");
  if (method == BruteForceMethod::automatic) method = n <= 24 ? BruteForceMethod::full : BruteForceMethod::bipartite;
  return method == BruteForceMethod::full ? brute_full(instance) : brute_bipartite(instance);
}

// ---------------------------------------------------------------------------
// Column transfer

namespace {

struct ColumnModel {
  int rows, cols, k;
  unsigned bits;  // rows * k
  // Per column, per row: index of (row, col, half, unit) or -1 when dead.
  std::vector<std::int32_t> index;  // [((col * rows + row) * 2 + half) * k + unit]

  std::int32_t at(int col, int row, int half, int unit) const {
    return index[static_cast<std::size_t>(((col * rows + row) * 2 + half) * k + unit)];
  }
};

std::int64_t coupling(const Instance& inst, std::int32_t a, std::int32_t b) {
  if (a < 0 || b < 0) return 0;
  const auto& g = inst.graph();
  auto e = g.edge_index(g.active()[static_cast<std::size_t>(a)], g.active()[static_cast<std::size_t>(b)]);
  return e ? inst.couplings()[*e].raw() : 0;
}

// Spin of bit b in state y: bit set means -1.
inline std::int64_t spin(std::uint64_t y, unsigned b) { return (y >> b) & 1u ? -1 : 1; }

// Minimum over the half-0 chains of one column for a fixed half-1 state.
class ColumnEnergy {
 public:
  ColumnEnergy(const Instance& inst, const ColumnModel& m, int col) : m_(m), col_(col) {
    int k = m.k;
    std::size_t patterns = std::size_t{1} << k;
    row_field_.assign(static_cast<std::size_t>(m.rows * k) * patterns, 0);
    row_h1_.assign(static_cast<std::size_t>(m.rows) * patterns, 0);
    dead1_mask_ = 0;
    for (int row = 0; row < m.rows; ++row) {
      for (int u = 0; u < k; ++u)
        if (m.at(col, row, 1, u) < 0) dead1_mask_ |= std::uint64_t{1} << (row * k + u);
      for (std::size_t p = 0; p < patterns; ++p) {
        std::int64_t h1 = 0;
        for (int u = 0; u < k; ++u) {
          std::int32_t v = m.at(col, row, 1, u);
          if (v >= 0) h1 += inst.fields()[static_cast<std::size_t>(v)].raw() * spin(p, static_cast<unsigned>(u));
        }
        row_h1_[static_cast<std::size_t>(row) * patterns + p] = h1;
        for (int u = 0; u < k; ++u) {
          std::int32_t s0 = m.at(col, row, 0, u);
          std::int64_t f = 0;
          if (s0 >= 0) {
            f = inst.fields()[static_cast<std::size_t>(s0)].raw();
            for (int u1 = 0; u1 < k; ++u1)
              f += coupling(inst, s0, m.at(col, row, 1, u1)) * spin(p, static_cast<unsigned>(u1));
          }
          row_field_[(static_cast<std::size_t>(row) * k + u) * patterns + p] = f;
        }
      }
    }
    vertical_.assign(static_cast<std::size_t>(m.rows * k), 0);
    dead0_.assign(static_cast<std::size_t>(m.rows * k), false);
    for (int row = 0; row < m.rows; ++row)
      for (int u = 0; u < k; ++u) {
        dead0_[static_cast<std::size_t>(row * k + u)] = m.at(col, row, 0, u) < 0;
        if (row + 1 < m.rows)
          vertical_[static_cast<std::size_t>(row * k + u)] =
              coupling(inst, m.at(col, row, 0, u), m.at(col, row + 1, 0, u));
      }
  }

  std::uint64_t dead_mask() const { return dead1_mask_; }

  std::int64_t field(int row, int u, std::uint64_t y) const {
    std::size_t patterns = std::size_t{1} << m_.k;
    std::uint64_t p = (y >> (row * m_.k)) & (patterns - 1);
    return row_field_[(static_cast<std::size_t>(row) * m_.k + u) * patterns + p];
  }

  /// Energy of the column's own terms minimized over half-0 spins.
  MinCount evaluate(std::uint64_t y, bool counting) const {
    std::size_t patterns = std::size_t{1} << m_.k;
    std::int64_t total = 0;
    std::uint64_t count = 1;
    for (int row = 0; row < m_.rows; ++row)
      total += row_h1_[static_cast<std::size_t>(row) * patterns + ((y >> (row * m_.k)) & (patterns - 1))];
    for (int u = 0; u < m_.k; ++u) {
      // Two-state chain over rows: best[s] for s = +1 (0) and -1 (1).
      std::int64_t b[2] = {0, 0};
      std::uint64_t c[2] = {0, 0};
      for (int row = 0; row < m_.rows; ++row) {
        std::int64_t f = field(row, u, y);
        bool dead = dead0_[static_cast<std::size_t>(row * m_.k + u)];
        std::int64_t nb[2];
        std::uint64_t nc[2];
        for (int s = 0; s < 2; ++s) {
          std::int64_t sv = s ? -1 : 1;
          if (dead && s == 1) {
            nb[s] = kInf;
            nc[s] = 0;
            continue;
          }
          std::int64_t own = f * sv;
          if (row == 0) {
            nb[s] = own;
            nc[s] = 1;
          } else {
            std::int64_t j = vertical_[static_cast<std::size_t>((row - 1) * m_.k + u)];
            std::int64_t via0 = b[0] >= kInf ? kInf : b[0] + j * sv;
            std::int64_t via1 = b[1] >= kInf ? kInf : b[1] - j * sv;
            if (via0 < via1) {
              nb[s] = via0 + own;
              nc[s] = c[0];
            } else if (via1 < via0) {
              nb[s] = via1 + own;
              nc[s] = c[1];
            } else {
              nb[s] = via0 + own;
              nc[s] = sat_add(c[0], c[1]);
            }
          }
        }
        b[0] = nb[0];
        b[1] = nb[1];
        c[0] = nc[0];
        c[1] = nc[1];
      }
      if (b[0] < b[1]) {
        total += b[0];
        if (counting) count = sat_mul(count, c[0]);
      } else if (b[1] < b[0]) {
        total += b[1];
        if (counting) count = sat_mul(count, c[1]);
      } else {
        total += b[0];
        if (counting) count = sat_mul(count, sat_add(c[0], c[1]));
      }
    }
    return {total, count};
  }

  /// Optimal half-0 spins for the given half-1 state (first optimum).
  void backtrack(std::uint64_t y, SpinConfig& out) const {
    for (int u = 0; u < m_.k; ++u) {
      std::vector<std::array<std::int64_t, 2>> best(static_cast<std::size_t>(m_.rows));
      for (int row = 0; row < m_.rows; ++row) {
        std::int64_t f = field(row, u, y);
        bool dead = dead0_[static_cast<std::size_t>(row * m_.k + u)];
        for (int s = 0; s < 2; ++s) {
          std::int64_t sv = s ? -1 : 1;
          if (dead && s == 1) {
            best[static_cast<std::size_t>(row)][s] = kInf;
            continue;
          }
          std::int64_t v = f * sv;
          if (row > 0) {
            std::int64_t j = vertical_[static_cast<std::size_t>((row - 1) * m_.k + u)];
            const auto& p = best[static_cast<std::size_t>(row - 1)];
            std::int64_t via0 = p[0] >= kInf ? kInf : p[0] + j * sv;
            std::int64_t via1 = p[1] >= kInf ? kInf : p[1] - j * sv;
            v += std::min(via0, via1);
          }
          best[static_cast<std::size_t>(row)][s] = v;
        }
      }
      int s = best.back()[0] <= best.back()[1] ? 0 : 1;
      for (int row = m_.rows - 1; row >= 0; --row) {
        std::int32_t idx = m_.at(col_, row, 0, u);
        if (idx >= 0) out.set(static_cast<std::size_t>(idx), s ? std::int8_t{-1} : std::int8_t{1});
        if (row == 0) break;
        std::int64_t j = vertical_[static_cast<std::size_t>((row - 1) * m_.k + u)];
        std::int64_t sv = s ? -1 : 1;
        const auto& p = best[static_cast<std::size_t>(row - 1)];
        std::int64_t via0 = p[0] >= kInf ? kInf : p[0] + j * sv;
        std::int64_t via1 = p[1] >= kInf ? kInf : p[1] - j * sv;
        s = via0 <= via1 ? 0 : 1;
      }
    }
  }

 private:
  const ColumnModel& m_;
  int col_;
  std::vector<std::int64_t> row_field_;  // [(row * k + u) * 2^k + pattern]
  std::vector<std::int64_t> row_h1_;     // [row * 2^k + pattern]
  std::vector<std::int64_t> vertical_;   // [row * k + u] coupling (row, u)-(row+1, u)
  std::vector<bool> dead0_;
  std::uint64_t dead1_mask_ = 0;
};

}  // namespace

ExactResult column_dp(const Instance& instance, const ColumnDpOptions& options) {
  const auto& g = instance.graph();
  ColumnModel m{g.rows(), g.cols(), g.half_size(), 0, {}};
  m.bits = static_cast<unsigned>(m.rows * m.k);
  if (m.bits > options.max_state_bits || m.bits > 40)
    throw Error("column interface of " + std::to_string(m.bits) + " bits exceeds the limit of " +
                std::to_string(std::min(options.max_state_bits, 40u)));
  m.index.assign(static_cast<std::size_t>(m.cols * m.rows * 2 * m.k), -1);
  for (int col = 0; col < m.cols; ++col)
    for (int row = 0; row < m.rows; ++row)
      for (int half = 0; half < 2; ++half)
        for (int u = 0; u < m.k; ++u) {
          auto idx = g.index_of(g.vertex_id(row, col, half, u));
          m.index[static_cast<std::size_t>(((col * m.rows + row) * 2 + half) * m.k + u)] =
              idx ? static_cast<std::int32_t>(*idx) : -1;
        }
  const std::size_t states = std::size_t{1} << m.bits;
  bool counting = options.count_degeneracy;

  // F[col][y]: best energy of columns 0..col with column col's half-1 state y.
  std::vector<std::vector<std::int64_t>> F(static_cast<std::size_t>(m.cols));
  std::vector<std::uint64_t> count, incoming_count;
  std::vector<std::int64_t> incoming;
  std::vector<std::unique_ptr<ColumnEnergy>> columns;
  for (int col = 0; col < m.cols; ++col) {
    columns.push_back(std::make_unique<ColumnEnergy>(instance, m, col));
    const ColumnEnergy& ce = *columns.back();
    // Transfer from the previous column: separable per bit, one butterfly each.
    if (col == 0) {
      incoming.assign(states, 0);
      if (counting) incoming_count.assign(states, 1);
    } else {
      incoming = F[static_cast<std::size_t>(col - 1)];
      if (counting) incoming_count = count;
      for (unsigned b = 0; b < m.bits; ++b) {
        int row = static_cast<int>(b) / m.k, u = static_cast<int>(b) % m.k;
        std::int64_t j = coupling(instance, m.at(col - 1, row, 1, u), m.at(col, row, 1, u));
        std::size_t bit = std::size_t{1} << b;
        for (std::size_t y = 0; y < states; ++y) {
          if (y & bit) continue;
          std::int64_t o0 = incoming[y], o1 = incoming[y | bit];
          // new(y_b = +1) = min(o0 + J, o1 - J); new(y_b = -1) = min(o0 - J, o1 + J)
          std::int64_t a0 = o0 >= kInf ? kInf : o0 + j, a1 = o1 >= kInf ? kInf : o1 - j;
          std::int64_t c0 = o0 >= kInf ? kInf : o0 - j, c1 = o1 >= kInf ? kInf : o1 + j;
          std::int64_t n0 = std::min(a0, a1), n1 = std::min(c0, c1);
          if (counting) {
            std::uint64_t k0 = incoming_count[y], k1 = incoming_count[y | bit];
            incoming_count[y] = a0 < a1 ? k0 : a1 < a0 ? k1 : sat_add(k0, k1);
            incoming_count[y | bit] = c0 < c1 ? k0 : c1 < c0 ? k1 : sat_add(k0, k1);
          }
          incoming[y] = n0;
          incoming[y | bit] = n1;
        }
      }
    }
    auto& Fc = F[static_cast<std::size_t>(col)];
    Fc.assign(states, kInf);
    if (counting) count.assign(states, 0);
    std::uint64_t dead = ce.dead_mask();
    for (std::size_t y = 0; y < states; ++y) {
      if (y & dead) continue;
      if (incoming[y] >= kInf) continue;
      MinCount c = ce.evaluate(y, counting);
      Fc[y] = incoming[y] + c.value;
      if (counting) count[y] = sat_mul(incoming_count[y], c.count);
    }
  }

  const auto& last = F.back();
  std::size_t y_best = static_cast<std::size_t>(std::min_element(last.begin(), last.end()) - last.begin());
  ExactResult r;
  r.e0 = Fixed::from_raw(last[y_best]);
  if (counting) {
    std::uint64_t total = 0;
    for (std::size_t y = 0; y < states; ++y)
      if (last[y] == last[y_best]) total = sat_add(total, count[y]);
    r.degeneracy = total;
    r.degeneracy_saturated = total == kCountMax;
  }

  // Witness: walk back through the stored columns.
  SpinConfig w(instance.spin_count());
  std::uint64_t y = y_best;
  for (int col = m.cols - 1; col >= 0; --col) {
    for (unsigned b = 0; b < m.bits; ++b) {
      std::int32_t idx = m.at(col, static_cast<int>(b) / m.k, 1, static_cast<int>(b) % m.k);
      if (idx >= 0) w.set(static_cast<std::size_t>(idx), static_cast<std::int8_t>(spin(y, b)));
    }
    columns[static_cast<std::size_t>(col)]->backtrack(y, w);
    if (col == 0) break;
    // Previous state minimizing F[col-1](y') + E_h(y', y).
    std::vector<std::int64_t> jb(m.bits);
    for (unsigned b = 0; b < m.bits; ++b)
      jb[b] = coupling(instance, m.at(col - 1, static_cast<int>(b) / m.k, 1, static_cast<int>(b) % m.k),
                       m.at(col, static_cast<int>(b) / m.k, 1, static_cast<int>(b) % m.k));
    const auto& prev = F[static_cast<std::size_t>(col - 1)];
    std::int64_t best = kInf;
    std::uint64_t arg = 0;
    for (std::size_t yp = 0; yp < states; ++yp) {
      if (prev[yp] >= kInf) continue;
      std::int64_t v = prev[yp];
      for (unsigned b = 0; b < m.bits; ++b) v += jb[b] * spin(yp, b) * spin(y, b);
      if (v < best) {
        best = v;
        arg = yp;
      }
    }
    y = arg;
  }
  r.witness = std::move(w);
  if (chimera::energy(instance, r.witness) != r.e0) throw Error("column_dp witness does not reproduce E0");
  return r;
}

std::vector<StateLabel> excitation_gap_states(const Instance& instance, std::span<const SpinConfig> configs,
                                              Energy e0) {
  bool gap_defined = instance.is_pm_one();
  Energy es = e0 + Fixed::from_int(2);
  std::vector<StateLabel> out;
  out.reserve(configs.size());
  for (const auto& c : configs) {
    Energy e = chimera::energy(instance, c);
    if (e == e0) out.push_back(StateLabel::ground);
    else if (gap_defined && e == es) out.push_back(StateLabel::excited);
    else out.push_back(StateLabel::other);
  }
  return out;
}

std::string_view label_name(StateLabel label) {
  switch (label) {
    case StateLabel::ground: return "GS";
    case StateLabel::excited: return "ES";
    default: return "other";
  }
}

std::string serialize_results(std::span<const std::pair<std::string, ExactResult>> results) {
  std::string out = table::row({"id", "E0", "degeneracy"});
  for (const auto& [id, r] : results) {
    std::string deg = !r.degeneracy ? "-"
                      : r.degeneracy_saturated ? ">=" + std::to_string(kCountMax)
                                               : std::to_string(*r.degeneracy);
    out += table::row({id, r.e0.to_string(), deg});
  }
  return out;
}

}  // namespace sglab::exact
