#include "twistprod/scene.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "twistprod/error.hpp"

namespace twistprod {

namespace {

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::string type;
  std::string name;
  std::size_t line = 0;
  std::vector<Entry> entries;

  const Entry* find(const std::string& key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
  const Entry& require(const std::string& key) const {
    if (const Entry* e = find(key)) return *e;
    throw SceneError(line, "[" + type + " " + name + "] is missing '" + key + "'");
  }
  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& e : entries) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return e.key == k; })) {
        throw SceneError(e.line, "unknown key '" + e.key + "' in [" + type +
                                     (name.empty() ? "" : " " + name) + "]");
      }
    }
  }
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Drops a '#' comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool is_name(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::vector<Section> split_sections(const std::string& text) {
  std::vector<Section> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  Entry* last = nullptr;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = strip_comment(raw);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const bool indented = std::isspace(static_cast<unsigned char>(line[0]));
    if (t.front() == '[') {
      if (t.back() != ']') throw SceneError(lineno, "unterminated section header");
      std::istringstream hs(t.substr(1, t.size() - 2));
      Section s;
      s.line = lineno;
      hs >> s.type >> s.name;
      std::string extra;
      if (hs >> extra) throw SceneError(lineno, "section header has extra words");
      if (s.type.empty()) throw SceneError(lineno, "empty section header");
      if (s.type != "run" && !is_name(s.name))
        throw SceneError(lineno, "[" + s.type + "] needs a name");
      out.push_back(std::move(s));
      last = nullptr;
      continue;
    }
    if (out.empty()) throw SceneError(lineno, "content before the first section");
    const auto eq = t.find('=');
    const bool continuation = indented && last && (eq == std::string::npos ||
                                                    t.find('"') < eq || t.find('(') < eq);
    if (continuation) {
      last->value += " " + t;
      continue;
    }
    if (eq == std::string::npos) throw SceneError(lineno, "expected 'key = value'");
    Entry e{trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno};
    if (!is_name(e.key)) throw SceneError(lineno, "bad key '" + e.key + "'");
    if (out.back().find(e.key)) throw SceneError(lineno, "duplicate key '" + e.key + "'");
    out.back().entries.push_back(std::move(e));
    last = &out.back().entries.back();
  }
  return out;
}

// Splits on sep outside quotes and parentheses.
std::vector<std::string> split_top(const std::string& s, char sep, std::size_t line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  int depth = 0;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (!quoted) {
      if (c == '(') ++depth;
      if (c == ')' && --depth < 0) throw SceneError(line, "unbalanced ')'");
      if (c == sep && depth == 0) {
        out.push_back(trim(cur));
        cur.clear();
        continue;
      }
    }
    cur += c;
  }
  if (quoted) throw SceneError(line, "unterminated string");
  if (depth != 0) throw SceneError(line, "unbalanced '('");
  out.push_back(trim(cur));
  return out;
}

// One value token: a quoted string (quotes removed) or a bare word.
std::string token(const std::string& s, std::size_t line) {
  if (s.empty()) throw SceneError(line, "empty value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"' || s.find('"', 1) != s.size() - 1)
      throw SceneError(line, "malformed string " + s);
    return s.substr(1, s.size() - 2);
  }
  if (s.find('"') != std::string::npos) throw SceneError(line, "stray quote in " + s);
  return s;
}

std::vector<std::string> list(const Entry& e) {
  std::vector<std::string> out;
  for (const auto& part : split_top(e.value, ',', e.line)) out.push_back(token(part, e.line));
  return out;
}

std::vector<std::vector<std::string>> rows(const Entry& e) {
  std::vector<std::vector<std::string>> out;
  for (const auto& row : split_top(e.value, ';', e.line)) {
    std::vector<std::string> r;
    for (const auto& part : split_top(row, ',', e.line)) r.push_back(token(part, e.line));
    out.push_back(std::move(r));
  }
  return out;
}

double number(const std::string& s, std::size_t line) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw SceneError(line, "expected a number, got '" + t + "'");
  return v;
}

std::uint64_t unsigned_number(const std::string& s, std::size_t line) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw SceneError(line, "expected a non-negative integer, got '" + t + "'");
  return v;
}

std::vector<Interval> parse_box(const Entry& e) {
  std::vector<Interval> out;
  for (const auto& part : split_top(e.value, ',', e.line)) {
    if (part.size() < 2 || part.front() != '(' || part.back() != ')')
      throw SceneError(e.line, "box entries look like (lo, hi), got '" + part + "'");
    const auto bounds = split_top(part.substr(1, part.size() - 2), ',', e.line);
    if (bounds.size() != 2) throw SceneError(e.line, "interval needs two bounds");
    out.push_back({number(bounds[0], e.line), number(bounds[1], e.line)});
  }
  return out;
}

BlockSplit parse_split(const Entry& e) {
  const auto parts = list(e);
  if (parts.size() != 2) throw SceneError(e.line, "split needs two sizes, like '1, 1'");
  return {static_cast<std::size_t>(unsigned_number(parts[0], e.line)),
          static_cast<std::size_t>(unsigned_number(parts[1], e.line))};
}

// Runs f, turning engine errors into scene errors at the given line.
template <typename F>
auto at_line(std::size_t line, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SceneError&) {
    throw;
  } catch (const Error& err) {
    throw SceneError(line, std::string(to_string(err.code())) + ": " + err.what());
  } catch (const std::invalid_argument& err) {
    throw SceneError(line, err.what());
  }
}

template <typename T>
const T& lookup(const std::vector<T>& items, const std::string& name, const char* kind,
                std::size_t line) {
  for (const auto& it : items)
    if (it.name == name) return it;
  throw SceneError(line, std::string("unknown ") + kind + " '" + name + "'");
}

const ChartDomain& lookup_chart(const std::vector<ChartDomain>& charts, const std::string& name,
                                std::size_t line) {
  for (const auto& c : charts)
    if (c.name() == name) return c;
  throw SceneError(line, "unknown chart '" + name + "'");
}

class Builder {
 public:
  Builder(Scene& scene, std::optional<double> pivot) : scene_(scene), pivot_(pivot) {}

  void build(const std::vector<Section>& sections) {
    static const std::vector<std::string> order = {"run",     "chart",    "metric",
                                                   "scalar",  "map",      "product",
                                                   "scenario", "immersion"};
    std::map<std::string, std::set<std::string>> names;
    for (const auto& s : sections) {
      if (std::find(order.begin(), order.end(), s.type) == order.end())
        throw SceneError(s.line, "unknown section type '" + s.type + "'");
      if (s.type == "run" && !s.name.empty())
        throw SceneError(s.line, "[run] takes no name");
      if (!names[s.type].insert(s.name).second)
        throw SceneError(s.line, "duplicate [" + s.type + (s.name.empty() ? "" : " " + s.name) + "]");
    }
    for (const auto& type : order)
      for (const auto& s : sections)
        if (s.type == type) dispatch(s);
  }

 private:
  void dispatch(const Section& s) {
    if (s.type == "run") run(s);
    else if (s.type == "chart") chart(s);
    else if (s.type == "metric") metric(s);
    else if (s.type == "scalar") scalar(s);
    else if (s.type == "map") map(s);
    else if (s.type == "product") product(s);
    else if (s.type == "scenario") scenario(s);
    else immersion(s);
  }

  double pivot() const {
    return pivot_.value_or(scene_.run.pivot_tolerance.value_or(kDefaultPivotTolerance));
  }

  void run(const Section& s) {
    s.allow({"suites", "samples", "seed", "tolerance", "pivot_tolerance"});
    RunSettings& r = scene_.run;
    if (auto* e = s.find("suites")) r.suites = list(*e);
    if (auto* e = s.find("samples")) r.samples = unsigned_number(e->value, e->line);
    if (auto* e = s.find("seed")) r.seed = unsigned_number(e->value, e->line);
    if (auto* e = s.find("tolerance")) r.tolerance = number(e->value, e->line);
    if (auto* e = s.find("pivot_tolerance")) r.pivot_tolerance = number(e->value, e->line);
    if (r.samples && *r.samples == 0) throw SceneError(s.line, "samples must be positive");
    if (r.tolerance && !(*r.tolerance > 0.0)) throw SceneError(s.line, "tolerance must be positive");
  }

  void chart(const Section& s) {
    s.allow({"coords", "box"});
    const Entry& c = s.require("coords");
    const Entry& b = s.require("box");
    auto coords = list(c);
    auto box = parse_box(b);
    scene_.charts.push_back(at_line(s.line, [&] {
      // Validates coordinate names the same way the expression parser does.
      (void)Expression::literal(0.0, coords);
      return ChartDomain(s.name, coords, box);
    }));
  }

  void metric(const Section& s) {
    s.allow({"chart", "diag", "components"});
    const Entry& c = s.require("chart");
    const ChartDomain& chart = lookup_chart(scene_.charts, token(c.value, c.line), c.line);
    const Entry* diag = s.find("diag");
    const Entry* comps = s.find("components");
    if (!diag == !comps) throw SceneError(s.line, "metric needs exactly one of 'diag' or 'components'");
    const Entry& e = diag ? *diag : *comps;
    MetricField g = at_line(e.line, [&] {
      return diag ? MetricField::parse_diagonal(chart, list(e)) : MetricField::parse(chart, rows(e));
    });
    g.set_pivot_tolerance(pivot());
    scene_.metrics.push_back({s.name, std::move(g)});
  }

  void scalar(const Section& s) {
    s.allow({"chart", "expr"});
    const Entry& c = s.require("chart");
    const Entry& e = s.require("expr");
    const ChartDomain& chart = lookup_chart(scene_.charts, token(c.value, c.line), c.line);
    scene_.scalars.push_back(
        {s.name, at_line(e.line, [&] { return ScalarField::parse(chart, token(e.value, e.line)); })});
  }

  void map(const Section& s) {
    s.allow({"from", "to", "components"});
    const Entry& f = s.require("from");
    const Entry& t = s.require("to");
    const Entry& c = s.require("components");
    const ChartDomain& from = lookup_chart(scene_.charts, token(f.value, f.line), f.line);
    const ChartDomain& to = lookup_chart(scene_.charts, token(t.value, t.line), t.line);
    const auto comps = list(c);
    SmoothMap m = at_line(c.line, [&] {
      if (comps.size() == 1 && comps[0] == "identity" && c.value == "identity") {
        if (from.coordinates() != to.coordinates())
          throw Error(ErrorCode::kDimension, "identity map needs charts with the same coordinates");
        std::vector<Expression> e;
        for (std::size_t i = 0; i < from.dimension(); ++i)
          e.push_back(Expression::variable(i, from.coordinates()));
        return SmoothMap(from, to, std::move(e));
      }
      return SmoothMap::parse(from, to, comps);
    });
    scene_.maps.push_back({s.name, std::move(m)});
  }

  void product(const Section& s) {
    s.allow({"factors", "sigma1", "sigma2", "kind"});
    const Entry& f = s.require("factors");
    const auto factors = list(f);
    if (factors.size() != 2) throw SceneError(f.line, "a product needs two factor metrics");
    const MetricField& g1 = lookup(scene_.metrics, factors[0], "metric", f.line).metric;
    const MetricField& g2 = lookup(scene_.metrics, factors[1], "metric", f.line).metric;
    std::vector<std::string> coords = g1.chart().coordinates();
    coords.insert(coords.end(), g2.chart().coordinates().begin(), g2.chart().coordinates().end());

    auto twist = [&](const char* key) {
      const Entry* e = s.find(key);
      if (!e) return at_line(s.line, [&] { return Expression::literal(1.0, coords); });
      return at_line(e->line, [&] { return Expression::parse(token(e->value, e->line), coords); });
    };
    Expression sigma1 = twist("sigma1");
    Expression sigma2 = twist("sigma2");
    NamedProduct p{s.name, at_line(s.line, [&] {
                     return build_doubly_twisted(s.name, g1, g2, sigma1, sigma2);
                   }),
                   std::nullopt};
    p.product.set_pivot_tolerance(pivot());
    if (const Entry* k = s.find("kind")) {
      const std::string kind = token(k->value, k->line);
      p.declared = parse_product_kind(kind);
      if (!p.declared) throw SceneError(k->line, "unknown product kind '" + kind + "'");
      if (auto why = p.product.violation(*p.declared))
        throw SceneError(k->line, "product '" + s.name + "' is declared " + kind + " but " + *why);
    }
    scene_.products.push_back(std::move(p));
  }

  void scenario(const Section& s) {
    s.allow({"source", "source_factors", "target", "maps"});
    const Entry& t = s.require("target");
    const Entry& m = s.require("maps");
    const DoublyTwistedProduct& target =
        lookup(scene_.products, token(t.value, t.line), "product", t.line).product;
    const auto maps = list(m);
    if (maps.size() != 2) throw SceneError(m.line, "a scenario needs two factor maps");
    const SmoothMap& phi1 = lookup(scene_.maps, maps[0], "map", m.line).map;
    const SmoothMap& phi2 = lookup(scene_.maps, maps[1], "map", m.line).map;
    const Entry* src = s.find("source");
    const Entry* factors = s.find("source_factors");
    if (!src == !factors)
      throw SceneError(s.line, "scenario needs exactly one of 'source' or 'source_factors'");
    if (src) {
      const DoublyTwistedProduct& source =
          lookup(scene_.products, token(src->value, src->line), "product", src->line).product;
      scene_.scenarios.push_back(
          at_line(s.line, [&] { return build_scenario(s.name, source, target, phi1, phi2); }));
    } else {
      const auto names = list(*factors);
      if (names.size() != 2) throw SceneError(factors->line, "source_factors needs two metrics");
      const MetricField& g1 = lookup(scene_.metrics, names[0], "metric", factors->line).metric;
      const MetricField& g2 = lookup(scene_.metrics, names[1], "metric", factors->line).metric;
      scene_.scenarios.push_back(at_line(s.line, [&] {
        auto sc = build_scenario_derived(s.name, g1, g2, target, phi1, phi2);
        return sc;
      }));
    }
  }

  void immersion(const Section& s) {
    s.allow({"source_metric", "target_metric", "map", "split", "target_split"});
    const Entry& sm = s.require("source_metric");
    const Entry& tm = s.require("target_metric");
    const Entry& mp = s.require("map");
    ImmersionSetup setup;
    setup.name = s.name;
    setup.gN = lookup(scene_.metrics, token(sm.value, sm.line), "metric", sm.line).metric;
    setup.gM = lookup(scene_.metrics, token(tm.value, tm.line), "metric", tm.line).metric;
    setup.map = lookup(scene_.maps, token(mp.value, mp.line), "map", mp.line).map;
    if (const Entry* e = s.find("split")) setup.split = parse_split(*e);
    else setup.split = {setup.map.source().dimension(), 0};
    if (const Entry* e = s.find("target_split")) setup.target_split = parse_split(*e);
    at_line(s.line, [&] {
      setup.validate();
      return 0;
    });
    scene_.immersions.push_back(std::move(setup));
  }

  Scene& scene_;
  std::optional<double> pivot_;
};

}  // namespace

const NamedProduct* Scene::find_product(const std::string& product_name) const {
  for (const auto& p : products)
    if (p.name == product_name) return &p;
  return nullptr;
}

Scene parse_scene(const std::string& text, const std::string& name,
                  std::optional<double> pivot_tolerance) {
  Scene scene;
  scene.name = name;
  Builder(scene, pivot_tolerance).build(split_sections(text));
  return scene;
}

Scene load_scene(const std::string& path, std::optional<double> pivot_tolerance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SceneError(0, "cannot open scene file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  Scene scene = parse_scene(buf.str(), std::filesystem::path(path).stem().string(),
                            pivot_tolerance);
  scene.path = path;
  return scene;
}

}  // namespace twistprod
