#include "sglab/trace_io.hpp"

#include <cstdio>
#include <sstream>

#include "sglab/error.hpp"
#include "sglab/table.hpp"

namespace sglab {

namespace {

constexpr std::string_view kMagic = "sglab-trace v1";

std::string exact_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

Energy parse_energy(std::string_view s, std::size_t line) {
  auto e = Fixed::parse(s);
  if (!e) throw ParseError(line, "bad energy '" + std::string(s) + "'");
  return *e;
}

}  // namespace

std::string serialize_trace_dump(const engine::RunOutput& run) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out += kMagic;
  out += "\ninstance " + (run.instance_id.empty() ? std::string("-") : run.instance_id) + "\n";
  out += "seed " + std::to_string(run.seed) + "\n";
  out += "replicas " + std::to_string(run.replicas) + "\n";
  out += "steps " + std::to_string(run.steps) + "\n";
  out += "sweeps_per_step " + std::to_string(run.sweeps_per_step) + "\n";
  out += "trace_stride " + std::to_string(run.trace_stride) + "\n";
  out += "ladder";
  for (double t : run.ladder) out += " " + exact_real(t);
  out += "\n";
  if (run.min_energy != engine::kInfiniteEnergy) out += "min_energy " + run.min_energy.to_string() + "\n";
  for (const auto& t : run.traces) {
    out += "trace " + std::to_string(t.copy) + " ";
    for (std::uint8_t v : t.indices) {
      out += kHex[v >> 4];
      out += kHex[v & 15];
    }
    out += "\n";
  }
  for (std::size_t k = 0; k < run.energy_series.size(); ++k) {
    out += "energies " + std::to_string(k);
    for (double e : run.energy_series[k]) out += " " + exact_real(e);
    out += "\n";
  }
  for (const auto& s : run.snapshots) {
    out += "snapshot " + std::to_string(s.checkpoint) + " " + std::to_string(s.step) + " " +
           std::to_string(s.replica) + " " + std::to_string(s.slot) + " " + std::to_string(s.copy) + " " +
           s.energy.to_string() + " " + s.config.to_string() + "\n";
  }
  out += "end\n";
  return out;
}

engine::RunOutput parse_trace_dump(std::string_view text) {
  engine::RunOutput run;
  run.min_energy = engine::kInfiniteEnergy;
  std::size_t line_no = 0;
  bool seen_magic = false, seen_end = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!seen_magic) {
      if (line != kMagic) throw ParseError(line_no, "not a trace dump (expected '" + std::string(kMagic) + "')");
      seen_magic = true;
      continue;
    }
    if (seen_end) throw ParseError(line_no, "content after 'end'");
    auto f = table::split_ws(line);
    const std::string& key = f[0];
    auto need = [&](std::size_t n) {
      if (f.size() != n) throw ParseError(line_no, "'" + key + "' expects " + std::to_string(n - 1) + " fields");
    };
    if (key == "instance") {
      need(2);
      run.instance_id = f[1] == "-" ? "" : f[1];
    } else if (key == "seed") {
      need(2);
      run.seed = table::parse_uint(f[1], line_no);
    } else if (key == "replicas") {
      need(2);
      run.replicas = static_cast<std::uint32_t>(table::parse_uint(f[1], line_no));
    } else if (key == "steps") {
      need(2);
      run.steps = table::parse_uint(f[1], line_no);
    } else if (key == "sweeps_per_step") {
      need(2);
      run.sweeps_per_step = static_cast<std::uint32_t>(table::parse_uint(f[1], line_no));
    } else if (key == "trace_stride") {
      need(2);
      run.trace_stride = static_cast<std::uint32_t>(table::parse_uint(f[1], line_no));
    } else if (key == "ladder") {
      run.ladder.clear();
      for (std::size_t i = 1; i < f.size(); ++i) run.ladder.push_back(table::parse_real(f[i], line_no));
      try {
        engine::TemperatureLadder check(run.ladder);
      } catch (const Error& e) {
        throw ParseError(line_no, e.what());
      }
    } else if (key == "min_energy") {
      need(2);
      run.min_energy = parse_energy(f[1], line_no);
    } else if (key == "trace") {
      if (f.size() != 3 && f.size() != 2) throw ParseError(line_no, "'trace' expects copy and samples");
      WalkTrace t;
      t.copy = static_cast<std::uint32_t>(table::parse_uint(f[1], line_no));
      t.n_temps = static_cast<std::uint32_t>(run.ladder.size());
      t.sweeps_per_sample = std::uint64_t{run.sweeps_per_step} * run.trace_stride;
      std::string_view hex = f.size() == 3 ? std::string_view(f[2]) : std::string_view();
      if (hex.size() % 2) throw ParseError(line_no, "odd trace length");
      t.indices.reserve(hex.size() / 2);
      for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_value(hex[i]), lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) throw ParseError(line_no, "bad trace digit");
        int v = hi * 16 + lo;
        if (v < 1 || static_cast<std::size_t>(v) > run.ladder.size())
          throw ParseError(line_no, "trace index " + std::to_string(v) + " outside the ladder");
        t.indices.push_back(static_cast<std::uint8_t>(v));
      }
      run.traces.push_back(std::move(t));
    } else if (key == "energies") {
      if (f.size() < 2) throw ParseError(line_no, "'energies' expects a slot");
      std::size_t slot = table::parse_uint(f[1], line_no);
      if (slot != run.energy_series.size()) throw ParseError(line_no, "energies out of order");
      std::vector<double> series;
      series.reserve(f.size() - 2);
      for (std::size_t i = 2; i < f.size(); ++i) series.push_back(table::parse_real(f[i], line_no));
      run.energy_series.push_back(std::move(series));
    } else if (key == "snapshot") {
      need(8);
      engine::Snapshot s;
      s.checkpoint = static_cast<std::uint32_t>(table::parse_uint(f[1], line_no));
      s.step = table::parse_uint(f[2], line_no);
      s.replica = static_cast<std::uint32_t>(table::parse_uint(f[3], line_no));
      s.slot = static_cast<std::uint32_t>(table::parse_uint(f[4], line_no));
      s.copy = static_cast<std::uint32_t>(table::parse_uint(f[5], line_no));
      s.energy = parse_energy(f[6], line_no);
      auto cfg = chimera::SpinConfig::parse(f[7]);
      if (!cfg) throw ParseError(line_no, "bad configuration");
      s.config = std::move(*cfg);
      run.snapshots.push_back(std::move(s));
    } else if (key == "end") {
      need(1);
      seen_end = true;
    } else {
      throw ParseError(line_no, "unknown record '" + key + "'");
    }
  }
  if (!seen_magic) throw ParseError(0, "empty trace dump");
  if (!seen_end) throw ParseError(line_no, "truncated trace dump (missing 'end')");
  if (run.ladder.empty()) throw ParseError(0, "trace dump has no ladder");
  return run;
}

void write_trace_dump(const std::string& path, const engine::RunOutput& run) {
  table::write_file(path, serialize_trace_dump(run));
}

engine::RunOutput read_trace_dump(const std::string& path) {
  try {
    return parse_trace_dump(table::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

}  // namespace sglab
