#include <charconv>
#include <sstream>

#include "sglab/chimera.hpp"
#include "sglab/error.hpp"
#include "sglab/table.hpp"

namespace sglab::chimera {
namespace {

std::uint64_t parse_u64(const std::string& s, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError(line, std::string("invalid ") + what + " '" + s + "'");
  return v;
}

int parse_dim(const std::string& s, std::size_t line) {
  std::uint64_t v = parse_u64(s, line, "dimension");
  if (v < 1 || v > 4096) throw ParseError(line, "dimension out of range: " + s);
  return static_cast<int>(v);
}

Fixed parse_value(const std::string& s, std::size_t line) {
  auto v = Fixed::parse(s);
  if (!v) throw ParseError(line, "invalid decimal value '" + s + "'");
  return *v;
}

}  // namespace

std::string serialize_instance(const Instance& instance) {
  const auto& g = instance.graph();
  std::ostringstream out;
  out << "chimera " << g.rows() << ' ' << g.cols() << ' ' << g.half_size() << '\n';
  out << "dead";
  for (VertexId v : g.dead()) out << ' ' << v;
  out << '\n';
  out << "seed " << instance.seed() << '\n';
  if (!instance.id().empty()) out << "id " << instance.id() << '\n';
  auto couplings = instance.couplings();
  for (std::size_t e = 0; e < couplings.size(); ++e) {
    const Edge& edge = g.edges()[e];
    out << "J " << edge.u << ' ' << edge.v << ' ' << couplings[e].to_string() << '\n';
  }
  auto fields = instance.fields();
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i] != Fixed{}) out << "h " << g.active()[i] << ' ' << fields[i].to_string() << '\n';
  return out.str();
}

std::string serialize_document(const Instance& instance, const SpinConfig& config) {
  if (config.size() != instance.spin_count()) throw Error("witness dimension does not match instance");
  return serialize_instance(instance) + "config " + config.to_string() + '\n';
}

InstanceDocument parse_document(std::string_view text) {
  std::shared_ptr<const ChimeraGraph> graph;
  int rows = 0, cols = 0, k = 0;
  std::set<VertexId> dead;
  std::uint64_t seed = 0;
  std::string id;
  bool header_done = false;
  std::vector<Fixed> couplings;
  std::vector<bool> have_coupling;
  std::vector<Fixed> fields;
  std::vector<bool> have_field;
  std::optional<SpinConfig> config;
  std::size_t config_line = 0;

  auto finish_header = [&](std::size_t line) {
    if (header_done) return;
    try {
      graph = build_chimera(rows, cols, k, dead);
    } catch (const Error& e) {
      throw ParseError(line, e.what());
    }
    couplings.assign(graph->edges().size(), Fixed{});
    have_coupling.assign(graph->edges().size(), false);
    fields.assign(graph->vertex_count(), Fixed{});
    have_field.assign(graph->vertex_count(), false);
    header_done = true;
  };

  auto vertex = [&](const std::string& s, std::size_t line) -> std::uint32_t {
    std::uint64_t v = parse_u64(s, line, "vertex id");
    if (v >= graph->ideal_vertex_count()) throw ParseError(line, "vertex " + s + " outside the graph");
    if (graph->is_dead(static_cast<VertexId>(v))) throw ParseError(line, "vertex " + s + " is dead");
    return static_cast<std::uint32_t>(v);
  };

  std::size_t line_no = 0;
  bool saw_chimera = false;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    auto tok = table::split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    const std::string& key = tok[0];
    if (!saw_chimera) {
      if (key != "chimera") throw ParseError(line_no, "missing header: expected 'chimera r c k'");
      if (tok.size() != 4) throw ParseError(line_no, "header needs 'chimera r c k'");
      rows = parse_dim(tok[1], line_no);
      cols = parse_dim(tok[2], line_no);
      k = parse_dim(tok[3], line_no);
      saw_chimera = true;
      continue;
    }
    if (key == "dead" || key == "seed" || key == "id") {
      if (header_done) throw ParseError(line_no, "'" + key + "' must precede coupling lines");
      if (key == "dead") {
        for (std::size_t i = 1; i < tok.size(); ++i)
          dead.insert(static_cast<VertexId>(parse_u64(tok[i], line_no, "dead vertex")));
      } else if (key == "seed") {
        if (tok.size() != 2) throw ParseError(line_no, "expected 'seed u64'");
        seed = parse_u64(tok[1], line_no, "seed");
      } else {
        if (tok.size() != 2) throw ParseError(line_no, "expected 'id name'");
        id = tok[1];
      }
      continue;
    }
    finish_header(line_no);
    if (key == "J") {
      if (tok.size() != 4) throw ParseError(line_no, "expected 'J i j value'");
      VertexId a = vertex(tok[1], line_no), b = vertex(tok[2], line_no);
      auto e = graph->edge_index(a, b);
      if (!e) throw ParseError(line_no, "no edge between " + tok[1] + " and " + tok[2]);
      if (have_coupling[*e]) throw ParseError(line_no, "duplicate coupling " + tok[1] + " " + tok[2]);
      couplings[*e] = parse_value(tok[3], line_no);
      have_coupling[*e] = true;
    } else if (key == "h") {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'h i value'");
      VertexId a = vertex(tok[1], line_no);
      std::uint32_t i = *graph->index_of(a);
      if (have_field[i]) throw ParseError(line_no, "duplicate field for vertex " + tok[1]);
      fields[i] = parse_value(tok[2], line_no);
      have_field[i] = true;
    } else if (key == "config") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'config <+/- string>'");
      config = SpinConfig::parse(tok[1]);
      if (!config) throw ParseError(line_no, "config must consist of '+' and '-'");
      config_line = line_no;
    } else {
      throw ParseError(line_no, "unknown record '" + key + "'");
    }
  }
  if (!saw_chimera) throw ParseError(0, "missing header");
  finish_header(line_no);
  for (std::size_t e = 0; e < have_coupling.size(); ++e)
    if (!have_coupling[e]) {
      const Edge& edge = graph->edges()[e];
      throw ParseError(0, "missing coupling for edge " + std::to_string(edge.u) + " " + std::to_string(edge.v));
    }
  if (config && config->size() != graph->vertex_count())
    throw ParseError(config_line, "config has " + std::to_string(config->size()) + " spins, graph has " +
                                      std::to_string(graph->vertex_count()));
  return InstanceDocument{Instance(graph, std::move(couplings), std::move(fields), std::move(id), seed),
                          std::move(config)};
}

Instance parse_instance(std::string_view text) { return parse_document(text).instance; }

Instance read_instance(const std::string& path) {
  try {
    return parse_instance(table::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

void write_instance(const std::string& path, const Instance& instance) {
  table::write_file(path, serialize_instance(instance));
}

std::shared_ptr<const ChimeraGraph> parse_graph_spec(std::string_view spec, const std::set<VertexId>& dead) {
  auto parts = table::split(spec, 'x');
  if (parts.size() != 3) throw Error("graph spec must look like RxCxK, got '" + std::string(spec) + "'");
  int dims[3];
  for (int i = 0; i < 3; ++i) {
    int v = 0;
    auto [p, ec] = std::from_chars(parts[i].data(), parts[i].data() + parts[i].size(), v);
    if (ec != std::errc() || p != parts[i].data() + parts[i].size() || v < 1)
      throw Error("graph spec must look like RxCxK, got '" + std::string(spec) + "'");
    dims[i] = v;
  }
  return build_chimera(dims[0], dims[1], dims[2], dead);
}

}  // namespace sglab::chimera
