#include "nccipw/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "nccipw/error.hpp"

namespace ncc::io {
namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || b == e) return std::nullopt;
  return v;
}

std::optional<long long> to_int(const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string line_error(const fs::path& path, std::size_t line, const std::string& what) {
  return path.string() + ":" + std::to_string(line) + ": " + what;
}

bool is_match_column(const std::string& name) {
  return name.size() >= 2 && name[0] == 'm' &&
         std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::string_view version() { return NCCIPW_VERSION; }

std::string format_double(double v) { return fmt("%.17g", v); }

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

Json optional_json(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::optional<double> json_optional(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CohortFile read_cohort_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw InputError(line_error(path, 1, "empty cohort file"));
  const auto header = split(lines[0], ',');
  if (header.size() < 3 || header[0] != "id" || header[1] != "time" || header[2] != "delta")
    throw InputError(line_error(path, 1, "header must start with id,time,delta"));

  std::vector<std::string> markers, matches;
  for (std::size_t c = 3; c < header.size(); ++c) {
    if (header[c].empty()) throw InputError(line_error(path, 1, "empty column name"));
    if (is_match_column(header[c])) {
      matches.push_back(header[c]);
    } else {
      if (!matches.empty()) throw InputError(line_error(path, 1, "marker columns must precede matching columns"));
      markers.push_back(header[c]);
    }
  }

  std::vector<double> time;
  std::vector<std::uint8_t> delta;
  std::vector<double> zflat, mflat;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const std::size_t lineno = ln + 1;
    const auto f = split(lines[ln], ',');
    if (f.size() != header.size())
      throw InputError(line_error(path, lineno, "expected " + std::to_string(header.size()) + " fields, found " +
                                                    std::to_string(f.size())));
    const auto id = to_int(f[0]);
    if (!id || *id != static_cast<long long>(time.size()))
      throw InputError(line_error(path, lineno, "id must equal the 0-based row index"));
    const auto t = to_double(f[1]);
    if (!t || !std::isfinite(*t) || *t <= 0.0) throw InputError(line_error(path, lineno, "time must be positive"));
    if (f[2] != "0" && f[2] != "1") throw InputError(line_error(path, lineno, "delta must be 0 or 1"));
    time.push_back(*t);
    delta.push_back(f[2] == "1" ? 1 : 0);
    for (std::size_t c = 3; c < f.size(); ++c) {
      const auto v = to_double(f[c]);
      if (!v || !std::isfinite(*v)) throw InputError(line_error(path, lineno, "non-numeric value in column " + header[c]));
      (c - 3 < markers.size() ? zflat : mflat).push_back(*v);
    }
  }
  const auto n = static_cast<Eigen::Index>(time.size());
  RowMatrix z = Eigen::Map<RowMatrix>(zflat.data(), n, static_cast<Eigen::Index>(markers.size()));
  RowMatrix m = Eigen::Map<RowMatrix>(mflat.data(), n, static_cast<Eigen::Index>(matches.size()));
  return CohortFile{Cohort(std::move(time), std::move(delta), std::move(z), std::move(m)), markers, matches};
}

void write_cohort_csv(const fs::path& path, const Cohort& cohort, const std::vector<std::string>& marker_names) {
  std::ostringstream out;
  out << "id,time,delta";
  for (std::size_t k = 0; k < cohort.n_markers(); ++k)
    out << ',' << (k < marker_names.size() ? marker_names[k] : "z" + std::to_string(k + 1));
  for (std::size_t k = 0; k < cohort.n_match_vars(); ++k) out << ",m" << k + 1;
  out << '\n';
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    out << i << ',' << format_double(cohort.time(i)) << ',' << (cohort.is_event(i) ? 1 : 0);
    for (std::size_t k = 0; k < cohort.n_markers(); ++k) out << ',' << format_double(cohort.markers()(i, k));
    for (std::size_t k = 0; k < cohort.n_match_vars(); ++k) out << ',' << format_double(cohort.match_vars()(i, k));
    out << '\n';
  }
  write_text(path, out.str());
}

void write_sample(const fs::path& dir, const NccSample& s) {
  std::ostringstream a;
  a << "id,v1,v0,p0\n";
  for (std::size_t j = 0; j < s.size(); ++j)
    a << j << ',' << int(s.v1[j]) << ',' << int(s.v0[j]) << ',' << format_double(s.p0[j]) << '\n';
  write_text(dir / "sample.csv", a.str());

  std::ostringstream b;
  b << "case_id,control_id\n";
  for (const CaseStratum& st : s.assignments)
    for (std::size_t l : st.controls) b << st.case_index << ',' << l << '\n';
  write_text(dir / "pairs.csv", b.str());
}

NccSample read_sample(const fs::path& dir, const Cohort& cohort, const std::optional<std::vector<double>>& match_tol) {
  const fs::path sp = dir / "sample.csv";
  const fs::path pp = dir / "pairs.csv";
  const auto sl = read_lines(sp);
  if (sl.empty() || trim(sl[0]) != "id,v1,v0,p0") throw InputError(line_error(sp, 1, "header must be id,v1,v0,p0"));
  const std::size_t n = cohort.size();
  std::vector<std::uint8_t> v1, v0;
  std::vector<double> p0;
  for (std::size_t ln = 1; ln < sl.size(); ++ln) {
    if (trim(sl[ln]).empty()) continue;
    const auto f = split(sl[ln], ',');
    if (f.size() != 4) throw InputError(line_error(sp, ln + 1, "expected 4 fields"));
    const auto id = to_int(f[0]);
    const auto p = to_double(f[3]);
    if (!id || *id != static_cast<long long>(v1.size())) throw InputError(line_error(sp, ln + 1, "id must equal the row index"));
    if ((f[1] != "0" && f[1] != "1") || (f[2] != "0" && f[2] != "1") || !p)
      throw InputError(line_error(sp, ln + 1, "malformed indicator or probability"));
    v1.push_back(f[1] == "1");
    v0.push_back(f[2] == "1");
    p0.push_back(*p);
  }
  if (v1.size() != n)
    throw InputError(sp.string() + ": sample has " + std::to_string(v1.size()) + " rows but the cohort has " +
                     std::to_string(n));

  const auto pl = read_lines(pp);
  if (pl.empty() || trim(pl[0]) != "case_id,control_id")
    throw InputError(line_error(pp, 1, "header must be case_id,control_id"));
  std::map<std::size_t, std::vector<std::size_t>> pairs;
  for (std::size_t ln = 1; ln < pl.size(); ++ln) {
    if (trim(pl[ln]).empty()) continue;
    const auto f = split(pl[ln], ',');
    const auto c = f.size() == 2 ? to_int(f[0]) : std::nullopt;
    const auto l = f.size() == 2 ? to_int(f[1]) : std::nullopt;
    if (!c || !l || *c < 0 || *l < 0 || static_cast<std::size_t>(*c) >= n || static_cast<std::size_t>(*l) >= n)
      throw InputError(line_error(pp, ln + 1, "malformed pair"));
    pairs[static_cast<std::size_t>(*c)].push_back(static_cast<std::size_t>(*l));
  }
  ControlAssignments assignments;
  for (auto& [c, ls] : pairs) assignments.push_back(CaseStratum{c, 0, ls});

  NccSample s = assemble_sample(cohort, v1, std::move(assignments), match_tol);
  for (std::size_t j = 0; j < n; ++j) {
    if (s.v0[j] != v0[j]) throw InputError(line_error(sp, j + 2, "v0 disagrees with pairs.csv"));
    if (std::abs(s.p0[j] - p0[j]) > 1e-12 * std::max(1.0, std::abs(p0[j])))
      throw InputError(line_error(sp, j + 2, "p0 disagrees with the value recomputed from the design"));
  }
  return s;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    const auto v = to_double(item);
    if (!v) throw InputError("invalid value '" + item + "' for " + key);
    out.push_back(*v);
  }
  if (out.empty()) throw InputError("empty value for " + key);
  return out;
}

namespace {

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InputError("invalid boolean '" + s + "' for " + key);
}

std::size_t parse_count(const std::string& s, const std::string& key) {
  const auto v = to_int(s);
  if (!v || *v < 0) throw InputError("invalid count '" + s + "' for " + key);
  return static_cast<std::size_t>(*v);
}

double parse_real(const std::string& s, const std::string& key) {
  const auto v = to_double(s);
  if (!v) throw InputError("invalid number '" + s + "' for " + key);
  return *v;
}

}  // namespace

SimGrid parse_sim_config(const std::string& text) {
  SimGrid g;
  g.pi1s = {g.base.pi1};
  g.matchings = {g.base.matching};
  g.models = {g.base.model};
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string val = trim(std::string_view(line).substr(eq + 1));
    SimConfig& b = g.base;
    try {
      if (key == "n_cohort") b.n_cohort = parse_count(val, key);
      else if (key == "pi1") g.pi1s = parse_double_list(val, key);
      else if (key == "m") b.m = static_cast<int>(parse_count(val, key));
      else if (key == "matching") {
        g.matchings.clear();
        for (const auto& item : split(val, ',')) g.matchings.push_back(parse_bool(item, key));
      } else if (key == "match_tol") b.match_tol = parse_double_list(val, key);
      else if (key == "t0") b.t0 = parse_real(val, key);
      else if (key == "model") {
        g.models.clear();
        for (const auto& item : split(val, ',')) g.models.push_back(parse_model(item));
      } else if (key == "link") b.link = parse_link(val);
      else if (key == "n_reps") b.n_reps = parse_count(val, key);
      else if (key == "n_perturb") b.n_perturb = parse_count(val, key);
      else if (key == "fpr_target") b.fpr_target = parse_real(val, key);
      else if (key == "level") b.level = parse_real(val, key);
      else if (key == "cutoff_mode") b.cutoff_mode = parse_cutoff_mode(val);
      else if (key == "master_seed") b.master_seed = static_cast<std::uint64_t>(parse_count(val, key));
      else throw InputError("unknown config key '" + key + "'");
    } catch (const InputError& e) {
      const std::string msg = e.what();
      if (msg.find(key) != std::string::npos) throw;
      throw InputError(key + ": " + msg);
    }
  }
  if (g.pi1s.empty() || g.matchings.empty() || g.models.empty()) throw InputError("pi1, matching, and model need values");
  for (const SimConfig& c : g.cells()) c.validate();
  return g;
}

SimGrid read_sim_config(const fs::path& path) { return parse_sim_config(read_text(path)); }

std::vector<SimConfig> SimGrid::cells() const {
  std::vector<SimConfig> out;
  for (ModelKind model : models)
    for (bool matching : matchings)
      for (double pi1 : pi1s) {
        SimConfig c = base;
        c.model = model;
        c.matching = matching;
        c.pi1 = pi1;
        out.push_back(c);
      }
  return out;
}

std::string cell_name(const SimConfig& c) {
  return std::string(to_string(c.model)) + "_pi1_" + fmt("%g", c.pi1) + (c.matching ? "_matched" : "_unmatched");
}

Json config_to_json(const SimConfig& c) {
  Json j;
  j["n_cohort"] = c.n_cohort;
  j["pi1"] = c.pi1;
  j["m"] = c.m;
  j["matching"] = c.matching;
  j["match_tol"] = c.match_tol;
  j["t0"] = c.t0;
  j["model"] = std::string(to_string(c.model));
  j["link"] = std::string(to_string(c.link));
  j["n_reps"] = c.n_reps;
  j["n_perturb"] = c.n_perturb;
  j["fpr_target"] = c.fpr_target;
  j["level"] = c.level;
  j["cutoff_mode"] = std::string(to_string(c.cutoff_mode));
  j["master_seed"] = c.master_seed;
  return j;
}

SimConfig config_from_json(const Json& j) {
  SimConfig c;
  c.n_cohort = j.at("n_cohort").get<std::size_t>();
  c.pi1 = j.at("pi1").get<double>();
  c.m = j.at("m").get<int>();
  c.matching = j.at("matching").get<bool>();
  c.match_tol = j.at("match_tol").get<std::vector<double>>();
  c.t0 = j.at("t0").get<double>();
  c.model = parse_model(j.at("model").get<std::string>());
  c.link = parse_link(j.at("link").get<std::string>());
  c.n_reps = j.at("n_reps").get<std::size_t>();
  c.n_perturb = j.at("n_perturb").get<std::size_t>();
  c.fpr_target = j.at("fpr_target").get<double>();
  c.level = j.at("level").get<double>();
  c.cutoff_mode = parse_cutoff_mode(j.at("cutoff_mode").get<std::string>());
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  return c;
}

namespace {

Json values_json(const std::vector<std::optional<double>>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(optional_json(x));
  return a;
}

std::vector<std::optional<double>> values_from(const Json& a) {
  std::vector<std::optional<double>> v;
  for (const auto& x : a) v.push_back(json_optional(x));
  return v;
}

Json scheme_json(const SchemeResult& s) {
  Json j;
  j["status"] = std::string(to_string(s.status));
  j["values"] = values_json(s.values);
  return j;
}

FitStatus parse_status(const std::string& s) {
  for (FitStatus f : {FitStatus::Converged, FitStatus::MaxIterations, FitStatus::Diverged, FitStatus::NonFinite,
                      FitStatus::RankDeficient, FitStatus::Degenerate, FitStatus::StepFailure})
    if (to_string(f) == s) return f;
  throw InputError("unknown fit status '" + s + "'");
}

SchemeResult scheme_from(const Json& j) {
  return SchemeResult{values_from(j.at("values")), parse_status(j.at("status").get<std::string>())};
}

}  // namespace

Json record_to_json(const SimConfig& c, const ReplicationRecord& r, const std::vector<double>& truths) {
  Json j;
  j["kind"] = "replication";
  j["config"] = config_to_json(c);
  j["rep_id"] = r.rep_id;
  j["parameters"] = sim_parameter_names();
  j["truth"] = truths;
  j["pi1_realized"] = r.pi1_realized;
  j["n_cases"] = r.n_cases;
  j["n_selected"] = r.n_selected;
  j["full"] = scheme_json(r.full);
  j["samuelsen"] = scheme_json(r.samuelsen);
  j["new"] = scheme_json(r.ipw_new);
  if (r.perturbation) {
    const PerturbationResult& p = *r.perturbation;
    Json pj;
    pj["se"] = values_json(p.se);
    pj["ci_lower"] = values_json(p.ci_lower);
    pj["ci_upper"] = values_json(p.ci_upper);
    pj["b_used"] = p.b_used;
    pj["b_total"] = p.b_total;
    j["perturbation"] = pj;
  } else {
    j["perturbation"] = nullptr;
  }
  return j;
}

ReplicationRecord record_from_json(const Json& j) {
  if (j.value("kind", "") != "replication") throw InputError("not a replication record");
  ReplicationRecord r;
  r.rep_id = j.at("rep_id").get<std::size_t>();
  r.pi1_realized = j.at("pi1_realized").get<double>();
  r.n_cases = j.at("n_cases").get<std::size_t>();
  r.n_selected = j.at("n_selected").get<std::size_t>();
  r.full = scheme_from(j.at("full"));
  r.samuelsen = scheme_from(j.at("samuelsen"));
  r.ipw_new = scheme_from(j.at("new"));
  if (!j.at("perturbation").is_null()) {
    const Json& pj = j.at("perturbation");
    PerturbationResult p;
    p.point = r.ipw_new.values;
    p.se = values_from(pj.at("se"));
    p.ci_lower = values_from(pj.at("ci_lower"));
    p.ci_upper = values_from(pj.at("ci_upper"));
    p.b_used = pj.at("b_used").get<std::size_t>();
    p.b_total = pj.at("b_total").get<std::size_t>();
    r.perturbation = std::move(p);
  }
  return r;
}

std::string report_csv(const AggregateReport& report) {
  auto f = [](const std::optional<double>& v) { return v ? fmt("%.6g", *v) : std::string("NA"); };
  std::ostringstream out;
  out << "parameter,true,bias_full,bias_samuelsen,esd_samuelsen,bias_new,esd_new,pase,coverage,nonconv_samuelsen,"
         "nonconv_new\n";
  for (const AggregateRow& r : report.rows) {
    out << r.parameter << ',' << fmt("%.6g", r.truth) << ',' << f(r.bias_full) << ',' << f(r.bias_samuelsen) << ','
        << f(r.esd_samuelsen) << ',' << f(r.bias_new) << ',' << f(r.esd_new) << ',' << f(r.pase) << ','
        << f(r.coverage) << ',' << r.nonconv_samuelsen << ',' << r.nonconv_new << '\n';
  }
  return out.str();
}

}  // namespace ncc::io
