#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mc.hpp"

namespace gapcert {

using Json = nlohmann::json;

namespace detail {

inline Matrix parse_matrix(const Json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(std::string(what) + ": expected a non-empty array of rows");
  const size_t rows = j.size();
  size_t cols = 0;
  for (size_t r = 0; r < rows; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || row.empty())
      throw ConfigError(std::string(what) + ": expected non-empty rows");
    if (r == 0)
      cols = row.size();
    else if (row.size() != cols)
      throw ConfigError(std::string(what) + ": ragged rows");
  }
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) {
      const Json& x = j[r][c];
      if (!x.is_number()) throw ConfigError(std::string(what) + ": non-numeric entry");
      m(static_cast<Index>(r), static_cast<Index>(c)) = x.get<double>();
    }
  return m;
}

inline std::vector<double> parse_number_list(const Json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const Json& x : j) {
    if (!x.is_number()) throw ConfigError(std::string(what) + ": non-numeric entry");
    out.push_back(x.get<double>());
  }
  return out;
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace detail

// {"type":"ss","A":...,"B":...,"C":...,"D":...} or
// {"type":"tf","num":[...],"den":[...]} with coefficients in descending powers
inline StateSpace parse_system(const Json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw ConfigError("system: expected an object with a \"type\" field");
  const std::string type = j["type"].get<std::string>();
  if (type == "ss") {
    for (const char* key : {"A", "B", "C", "D"})
      if (!j.contains(key)) throw ConfigError(std::string("system: missing ") + key);
    try {
      return make_ss(detail::parse_matrix(j["A"], "A"), detail::parse_matrix(j["B"], "B"),
                     detail::parse_matrix(j["C"], "C"), detail::parse_matrix(j["D"], "D"));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("system: ") + e.what());
    }
  }
  if (type == "tf") {
    if (!j.contains("num") || !j.contains("den"))
      throw ConfigError("system: tf needs \"num\" and \"den\"");
    try {
      return tf_to_ss(RationalTF{detail::parse_number_list(j["num"], "num"),
                                 detail::parse_number_list(j["den"], "den")});
    } catch (const DomainError& e) {
      throw ConfigError(std::string("system: ") + e.what());
    }
  }
  throw ConfigError("system: type must be \"ss\" or \"tf\"");
}

inline Json system_to_json(const StateSpace& s) {
  Json j;
  j["type"] = "ss";
  j["A"] = detail::matrix_to_json(s.A);
  j["B"] = detail::matrix_to_json(s.B);
  j["C"] = detail::matrix_to_json(s.C);
  j["D"] = detail::matrix_to_json(s.D);
  return j;
}

// {"nominal":<system>,"deltas":[{"target":"A","param":1,"matrix":...}]}
// with 1-based parameter indices
inline PlantFamily parse_family(const Json& j) {
  if (!j.is_object() || !j.contains("nominal"))
    throw ConfigError("family: expected an object with a \"nominal\" system");
  PlantFamily fam;
  fam.nominal = parse_system(j["nominal"]);
  if (j.contains("deltas")) {
    if (!j["deltas"].is_array()) throw ConfigError("family: \"deltas\" must be an array");
    for (const Json& d : j["deltas"]) {
      if (!d.is_object() || !d.contains("target") || !d.contains("param") || !d.contains("matrix"))
        throw ConfigError("family: each delta needs target, param, matrix");
      FamilyDelta fd;
      const std::string target = d["target"].is_string() ? d["target"].get<std::string>() : "";
      if (target == "A")
        fd.target = DeltaTarget::A;
      else if (target == "B")
        fd.target = DeltaTarget::B;
      else if (target == "C")
        fd.target = DeltaTarget::C;
      else
        throw ConfigError("family: delta target must be \"A\", \"B\" or \"C\"");
      if (!d["param"].is_number_integer() || d["param"].get<long>() < 1)
        throw ConfigError("family: delta param must be a 1-based integer index");
      fd.index = d["param"].get<long>() - 1;
      fd.matrix = detail::parse_matrix(d["matrix"], "delta matrix");
      fam.deltas.push_back(std::move(fd));
    }
  }
  return fam;
}

inline ExperimentConfig parse_experiment(const Json& j) {
  if (!j.is_object()) throw ConfigError("experiment: expected an object");
  for (const char* key : {"family", "controller", "theta"})
    if (!j.contains(key)) throw ConfigError(std::string("experiment: missing ") + key);

  ExperimentConfig cfg;
  cfg.family = parse_family(j["family"]);
  cfg.controller = parse_system(j["controller"]);

  const Json& th = j["theta"];
  if (!th.is_object() || !th.contains("mu") || !th.contains("sigma"))
    throw ConfigError("experiment: theta needs \"mu\" and \"sigma\"");
  const std::vector<double> mu = detail::parse_number_list(th["mu"], "mu");
  cfg.theta.mu = Eigen::Map<const Vector>(mu.data(), static_cast<Index>(mu.size()));
  if (!th["sigma"].is_number()) throw ConfigError("experiment: sigma must be a number");
  cfg.theta.sigma = th["sigma"].get<double>();

  if (j.contains("samples")) {
    if (!j["samples"].is_number_integer())
      throw ConfigError("experiment: samples must be an integer");
    cfg.samples = j["samples"].get<long>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      throw ConfigError("experiment: seed must be a non-negative integer");
    cfg.seed = j["seed"].get<uint64_t>();
  }
  if (j.contains("beta")) cfg.beta = j["beta"].get<double>();
  if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
  if (j.contains("gap_tol")) cfg.gap_tol = j["gap_tol"].get<double>();
  if (j.contains("gamma_grid"))
    cfg.gamma_grid = detail::parse_number_list(j["gamma_grid"], "gamma_grid");

  validate(cfg);
  return cfg;
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
  if (!out) throw ConfigError("short write on " + path);
}

// one row per sample; %.17g keeps the bytes identical across runs and
// thread counts
inline std::string samples_csv(const ExperimentResult& res) {
  const Index p = res.config.theta.p();
  std::string out = "index";
  for (Index k = 0; k < p; ++k) out += ",theta_" + std::to_string(k + 1);
  out += ",gap,stable,bpc,tnorm\n";
  for (size_t i = 0; i < res.stats.samples.size(); ++i) {
    const GapSample& s = res.stats.samples[i];
    out += std::to_string(i);
    for (Index k = 0; k < p; ++k) out += "," + detail::format_g17(s.theta(k));
    out += "," + detail::format_g17(s.gap);
    out += s.stable ? ",1" : ",0";
    out += "," + detail::format_g17(s.b);
    out += "," + detail::format_g17(s.t_norm);
    out += "\n";
  }
  return out;
}

inline Json report_to_json(const BoundReport& r) {
  Json j;
  j["name"] = r.name;
  Json inputs = Json::array();
  for (const auto& [key, value] : r.inputs) inputs.push_back(Json::array({key, value}));
  j["inputs"] = std::move(inputs);
  j["value"] = r.value;
  j["valid"] = r.valid;
  j["note"] = r.note;
  return j;
}

inline Json summary_json(const ExperimentResult& res) {
  Json j;
  Json cfg;
  cfg["family"]["nominal"] = system_to_json(res.config.family.nominal);
  {
    Json deltas = Json::array();
    for (const FamilyDelta& d : res.config.family.deltas) {
      Json dj;
      dj["target"] = d.target == DeltaTarget::A ? "A" : d.target == DeltaTarget::B ? "B" : "C";
      dj["param"] = d.index + 1;
      dj["matrix"] = detail::matrix_to_json(d.matrix);
      deltas.push_back(std::move(dj));
    }
    cfg["family"]["deltas"] = std::move(deltas);
  }
  cfg["controller"] = system_to_json(res.config.controller);
  {
    Json mu = Json::array();
    for (Index k = 0; k < res.config.theta.p(); ++k) mu.push_back(res.config.theta.mu(k));
    cfg["theta"]["mu"] = std::move(mu);
    cfg["theta"]["sigma"] = res.config.theta.sigma;
  }
  cfg["samples"] = res.config.samples;
  cfg["seed"] = res.config.seed;
  cfg["beta"] = res.config.beta;
  cfg["epsilon"] = res.config.epsilon;
  cfg["gap_tol"] = res.config.gap_tol;
  cfg["gamma_grid"] = res.config.gamma_grid;
  j["config"] = std::move(cfg);

  j["b_nominal"] = res.b_nominal;
  j["t_nominal"] = res.t_nominal;
  j["gap_at_mu"] = res.gap_at_mu;
  j["c_gap"] = res.c_gap;
  j["e_gap_hat"] = res.stats.e_gap_hat;
  j["l_gap_hat"] = res.stats.l_gap_hat;
  j["alpha_hat"] = res.stats.alpha_hat;
  j["e_t_hat"] = res.e_t_hat;
  j["t_count"] = res.t_count;
  j["e_fq_hat"] = res.e_fq_hat;
  j["l_q_hat"] = res.l_q_hat;
  j["fq_excluded"] = res.fq_excluded;
  j["p_gap_below_b"] = {{"p", res.p_gap_below_b.p},
                        {"se", res.p_gap_below_b.se},
                        {"count", res.p_gap_below_b.count},
                        {"n", res.p_gap_below_b.n}};
  j["stability_bound"] = report_to_json(res.stability_bound);
  j["expected_hinf_bound"] = report_to_json(res.expected_hinf_bound);
  {
    Json rows = Json::array();
    for (const GammaRow& row : res.perf_rows) {
      Json rj;
      rj["gamma"] = row.gamma;
      rj["bound"] = report_to_json(row.bound);
      rj["empirical"] = row.empirical;
      rj["se"] = row.se;
      rows.push_back(std::move(rj));
    }
    j["perf_rows"] = std::move(rows);
  }
  j["n_required"] = res.n_required;
  j["certificate"] = res.certificate;
  j["inv_gap"] = {{"mean", res.inv_gap_mean}, {"se", res.inv_gap_se}, {"count", res.inv_gap_count}};
  j["histogram"] = res.histogram;
  return j;
}

// static 40-bin bar chart of the gap distribution
inline std::string histogram_svg(const ExperimentResult& res) {
  const int width = 680, height = 420;
  const double x0 = 50.0, y0 = 370.0, plot_w = 600.0, plot_h = 330.0;
  long max_count = 1;
  for (long c : res.histogram) max_count = std::max(max_count, c);

  char buf[256];
  std::string svg;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double bar_w = plot_w / static_cast<double>(res.histogram.size());
  for (size_t i = 0; i < res.histogram.size(); ++i) {
    const double h = plot_h * static_cast<double>(res.histogram[i]) / static_cast<double>(max_count);
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                  "fill=\"#4878a8\"/>\n",
                  x0 + bar_w * static_cast<double>(i), y0 - h, bar_w - 1.0, h);
    svg += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", x0,
                y0, x0 + plot_w, y0);
  svg += buf;
  for (int t = 0; t <= 4; ++t) {
    const double x = x0 + plot_w * t / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\" "
                  "font-family=\"sans-serif\">%.2f</text>\n",
                  x, y0 + 18.0, t / 4.0);
    svg += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" font-family=\"sans-serif\">max bin "
                "%ld of %zu samples</text>\n",
                x0, 24.0, max_count, res.stats.samples.size());
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\" "
                "font-family=\"sans-serif\">gap</text>\n",
                x0 + plot_w / 2.0, static_cast<double>(height) - 6.0);
  svg += buf;
  svg += "</svg>\n";
  return svg;
}

inline void write_experiment_outputs(const std::string& dir, const ExperimentResult& res,
                                     bool with_svg = true) {
  write_text_file(dir + "/samples.csv", samples_csv(res));
  write_text_file(dir + "/summary.json", summary_json(res).dump(2) + "\n");
  if (with_svg) write_text_file(dir + "/histogram.svg", histogram_svg(res));
}

} // namespace gapcert
