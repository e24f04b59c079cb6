#pragma once

// JSON documents for systems, feedbacks and reports.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "phfb/certify.hpp"
#include "phfb/generators.hpp"
#include "phfb/pencil.hpp"
#include "phfb/ph_model.hpp"
#include "phfb/synthesis.hpp"

namespace phfb {

using Json = nlohmann::ordered_json;

struct SystemMetadata {
  std::optional<std::string> name;
  std::optional<std::uint64_t> seed;
  std::optional<GeneratorKnobs> knobs;
};

struct SystemDocument {
  PHSystem system;
  SystemMetadata metadata;
};

Json matrix_to_json(const Matrix& a);
/// Rejects ragged rows, non-numbers and shape mismatches. Throws ParseError.
Matrix matrix_from_json(const Json& j, Index rows, Index cols, const std::string& what);

/// {n, m, E, J, R, G, P, D, metadata?}; S and N are merged into D.
Json system_to_json(const PHSystem& sys, const SystemMetadata& meta = {});
/// Splits D into S, N. Throws ParseError, ShapeMismatch.
SystemDocument system_from_json(const Json& j);

SystemDocument load_system(const std::string& path);
void save_system(const std::string& path, const PHSystem& sys, const SystemMetadata& meta = {});

/// Accepts {"F": [[...]]} at the top level, as written by the synthesis
/// commands. Throws ParseError.
Feedback feedback_from_json(const Json& j, Index m, Index n);
Json feedback_to_json(const Feedback& fb);

Json complex_list_to_json(const std::vector<Complex>& zs);
Json tolerance_to_json(const ToleranceConfig& tol);
Json validation_to_json(const ValidationReport& rep);
Json pencil_to_json(const PencilReport& rep);
Json con1_to_json(const Con1Result& c);
Json rank_condition_to_json(const RankConditionResult& c);
Json con2_to_json(const Con2Result& c, const ToleranceConfig& tol);
Json cert_to_json(const CertReport& rep);
Json trace_to_json(const SynthesisTrace& tr);

Json read_json_file(const std::string& path);
Json parse_json(const std::string& text);
void write_text_file(const std::string& path, const std::string& text);
/// Pretty-printed with a trailing newline.
std::string dump(const Json& j);

}  // namespace phfb
