#include "phfb/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace phfb {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

Index read_dim(const Json& j, const char* key) {
  if (!j.contains(key)) parse_error(std::string("missing field '") + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    parse_error(std::string("field '") + key + "' must be a non-negative integer");
  }
  return static_cast<Index>(v.get<long long>());
}

Json definiteness_to_json(const DefinitenessClass& c, const ToleranceConfig& tol) {
  return Json{{"class", to_string(c.kind)},
              {"min_eigenvalue", c.min_eigenvalue},
              {"max_eigenvalue", c.max_eigenvalue},
              {"tolerance", tol.psd_tol * c.scale}};
}

}  // namespace

Json matrix_to_json(const Matrix& a) {
  Json rows = Json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < a.cols(); ++k) row.push_back(a(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, Index rows, Index cols, const std::string& what) {
  if (!j.is_array()) parse_error(what + ": expected an array of rows");
  if (static_cast<Index>(j.size()) != rows) {
    std::ostringstream msg;
    msg << what << ": expected " << rows << " rows, got " << j.size();
    throw Error(ErrorCode::ShapeMismatch, msg.str());
  }
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) parse_error(what + ": row is not an array");
    if (static_cast<Index>(row.size()) != cols) {
      std::ostringstream msg;
      msg << what << ": row " << i << " has " << row.size() << " entries, expected " << cols;
      throw Error(ErrorCode::ShapeMismatch, msg.str());
    }
    for (Index k = 0; k < cols; ++k) {
      const Json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) parse_error(what + ": entries must be numbers");
      a(i, k) = v.get<double>();
      if (!std::isfinite(a(i, k))) parse_error(what + ": entries must be finite");
    }
  }
  return a;
}

Json system_to_json(const PHSystem& sys, const SystemMetadata& meta) {
  sys.check_shapes();
  Json j;
  j["n"] = sys.n();
  j["m"] = sys.m();
  j["E"] = matrix_to_json(sys.E);
  j["J"] = matrix_to_json(sys.J);
  j["R"] = matrix_to_json(sys.R);
  j["G"] = matrix_to_json(sys.G);
  j["P"] = matrix_to_json(sys.P);
  j["D"] = matrix_to_json(sys.D());
  if (meta.name || meta.seed || meta.knobs) {
    Json md = Json::object();
    if (meta.name) md["name"] = *meta.name;
    if (meta.seed) md["seed"] = *meta.seed;
    if (meta.knobs) {
      const GeneratorKnobs& k = *meta.knobs;
      Json kj = Json::object();
      kj["rank_E"] = k.rank_E ? Json(*k.rank_E) : Json(nullptr);
      kj["rank_W"] = k.rank_W ? Json(*k.rank_W) : Json(nullptr);
      kj["force_axis_modes"] = k.force_axis_modes;
      kj["force_singular"] = k.force_singular;
      kj["s_definite"] = k.s_definite;
      md["knobs"] = kj;
    }
    j["metadata"] = md;
  }
  return j;
}

SystemDocument system_from_json(const Json& j) {
  if (!j.is_object()) parse_error("system document must be a JSON object");
  const Index n = read_dim(j, "n");
  const Index m = read_dim(j, "m");
  if (n < 1) parse_error("n must be at least 1");
  auto field = [&](const char* key, Index r, Index c) {
    if (!j.contains(key)) parse_error(std::string("missing matrix '") + key + "'");
    return matrix_from_json(j.at(key), r, c, key);
  };
  SystemDocument doc;
  doc.system = PHSystem::from_feedthrough(field("E", n, n), field("J", n, n), field("R", n, n),
                                          field("G", n, m), field("P", n, m), field("D", m, m));
  if (j.contains("metadata")) {
    const Json& md = j.at("metadata");
    if (!md.is_object()) parse_error("metadata must be an object");
    if (md.contains("name") && md.at("name").is_string()) doc.metadata.name = md.at("name").get<std::string>();
    if (md.contains("seed") && md.at("seed").is_number_unsigned()) {
      doc.metadata.seed = md.at("seed").get<std::uint64_t>();
    }
    if (md.contains("knobs") && md.at("knobs").is_object()) {
      const Json& kj = md.at("knobs");
      GeneratorKnobs k;
      if (kj.contains("rank_E") && kj.at("rank_E").is_number_integer()) k.rank_E = kj.at("rank_E").get<Index>();
      if (kj.contains("rank_W") && kj.at("rank_W").is_number_integer()) k.rank_W = kj.at("rank_W").get<Index>();
      k.force_axis_modes = kj.value("force_axis_modes", false);
      k.force_singular = kj.value("force_singular", false);
      k.s_definite = kj.value("s_definite", false);
      doc.metadata.knobs = k;
    }
  }
  return doc;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str());
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_error(std::string("malformed JSON: ") + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

SystemDocument load_system(const std::string& path) { return system_from_json(read_json_file(path)); }

void save_system(const std::string& path, const PHSystem& sys, const SystemMetadata& meta) {
  write_text_file(path, dump(system_to_json(sys, meta)));
}

Feedback feedback_from_json(const Json& j, Index m, Index n) {
  if (!j.is_object() || !j.contains("F")) parse_error("feedback document needs a field 'F'");
  Feedback fb;
  fb.F = matrix_from_json(j.at("F"), m, n, "F");
  return fb;
}

Json feedback_to_json(const Feedback& fb) { return matrix_to_json(fb.F); }

Json complex_list_to_json(const std::vector<Complex>& zs) {
  Json out = Json::array();
  for (const Complex& z : zs) out.push_back(Json{{"re", z.real()}, {"im", z.imag()}});
  return out;
}

Json tolerance_to_json(const ToleranceConfig& tol) {
  return Json{{"rank_rtol", tol.rank_rtol},
              {"psd_tol", tol.psd_tol},
              {"axis_tol", tol.axis_tol},
              {"stability_margin", tol.stability_margin}};
}

Json validation_to_json(const ValidationReport& rep) {
  Json checks = Json::array();
  for (const ConstraintVerdict& c : rep.checks) {
    checks.push_back(Json{{"name", c.name},
                          {"passed", c.passed},
                          {"margin", c.margin},
                          {"tolerance", c.tolerance}});
  }
  return Json{{"passed", rep.passed}, {"checks", checks}};
}

Json pencil_to_json(const PencilReport& rep) {
  Json j;
  j["regular"] = rep.regular;
  j["index"] = rep.index ? Json(*rep.index) : Json(nullptr);
  j["rank_E"] = rep.rank_E;
  j["stability_class"] = to_string(rep.stability_class);
  j["spectral_abscissa"] = rep.spectral_abscissa ? Json(*rep.spectral_abscissa) : Json(nullptr);
  j["axis_distance"] = rep.axis_distance ? Json(*rep.axis_distance) : Json(nullptr);
  j["axis_eigenvalues_semisimple"] = rep.axis_eigenvalues_semisimple;
  j["finite_eigenvalues"] = complex_list_to_json(rep.finite_eigenvalues);
  const KroneckerSummary& k = rep.kronecker;
  j["kronecker"] = Json{{"normal_rank", k.normal_rank},
                        {"infinite_block_sizes", k.infinite_block_sizes},
                        {"right_minimal_indices", k.right_minimal_indices},
                        {"left_minimal_indices", k.left_minimal_indices}};
  return j;
}

Json con1_to_json(const Con1Result& c) {
  return Json{{"holds", c.holds}, {"witnesses", complex_list_to_json(c.witnesses)}};
}

Json rank_condition_to_json(const RankConditionResult& c) {
  return Json{{"holds", c.holds}, {"rank", c.rank}, {"required", c.required}};
}

Json con2_to_json(const Con2Result& c, const ToleranceConfig& tol) {
  Json j;
  j["holds"] = c.holds;
  j["S"] = definiteness_to_json(c.s_class, tol);
  j["condition_matrix"] = c.s_class.positive_definite() ? definiteness_to_json(c.condition_class, tol)
                                                       : Json(nullptr);
  j["reason"] = c.reason.empty() ? Json(nullptr) : Json(c.reason);
  return j;
}

Json cert_to_json(const CertReport& rep) {
  Json j;
  j["goal"] = to_string(rep.goal);
  j["passed"] = rep.passed;
  j["ph_structure"] = Json{{"passed", rep.ph_structure},
                           {"min_eigenvalue", rep.w_min_eigenvalue},
                           {"max_eigenvalue", rep.w_max_eigenvalue},
                           {"norm", rep.w_norm},
                           {"tolerance", -rep.psd_tolerance}};
  j["regular"] = rep.regular;
  j["index"] = rep.index ? Json(*rep.index) : Json(nullptr);
  j["index_at_most_one"] = rep.index.has_value() && *rep.index <= 1;
  j["spectrum"] = complex_list_to_json(rep.spectrum);
  j["asymptotically_stable"] =
      Json{{"passed", rep.asymptotically_stable},
           {"stability_class", to_string(rep.stability_class)},
           {"spectral_abscissa", rep.spectral_abscissa ? Json(*rep.spectral_abscissa) : Json(nullptr)},
           {"tolerance", -rep.stability_tolerance}};
  j["strictly_passive"] = Json{{"passed", rep.strictly_passive},
                               {"min_eigenvalue", rep.w_min_eigenvalue},
                               {"tolerance", rep.psd_tolerance}};
  return j;
}

Json trace_to_json(const SynthesisTrace& tr) {
  const DCompression& dc = tr.compression;
  Json j;
  j["feedthrough_blocks"] = Json{{"m1", dc.m1}, {"m2", dc.m2}, {"m3", dc.m3}};
  j["dhat_condition"] = tr.dhat_condition;
  j["state_blocks"] = Json{{"mu1", tr.mu1}, {"mu2", tr.mu2}, {"mu3", tr.mu3}, {"mu4", tr.mu4}};
  j["beta"] = tr.beta;
  j["margin"] = tr.margin;
  return j;
}

}  // namespace phfb
