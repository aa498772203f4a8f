#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nccipw/cohort.hpp"
#include "nccipw/sampling.hpp"
#include "nccipw/simulation.hpp"

namespace ncc::io {

std::string_view version();

using Json = nlohmann::ordered_json;

struct CohortFile {
  Cohort cohort;
  std::vector<std::string> marker_names;
  std::vector<std::string> match_names;
};

/// Header `id,time,delta,<markers...>[,m1..mq]`; columns named m<digits>
/// after the markers are matching variables. Errors name the line number.
CohortFile read_cohort_csv(const std::filesystem::path& path);
void write_cohort_csv(const std::filesystem::path& path, const Cohort& cohort,
                      const std::vector<std::string>& marker_names = {});

/// `sample.csv` (id,v1,v0,p0) and `pairs.csv` (case_id,control_id) in `dir`.
void write_sample(const std::filesystem::path& dir, const NccSample& sample);

/// Reads a sample written by write_sample, rebuilds it against `cohort`, and
/// checks the stored v0 and p0 columns against the recomputed values.
NccSample read_sample(const std::filesystem::path& dir, const Cohort& cohort,
                      const std::optional<std::vector<double>>& match_tol);

/// A simulate config: scalar SimConfig keys plus list-valued pi1, matching, model.
struct SimGrid {
  SimConfig base;
  std::vector<double> pi1s;
  std::vector<bool> matchings;
  std::vector<ModelKind> models;

  std::vector<SimConfig> cells() const;
};

SimGrid parse_sim_config(const std::string& text);
SimGrid read_sim_config(const std::filesystem::path& path);

std::string cell_name(const SimConfig& c);
Json config_to_json(const SimConfig& c);
SimConfig config_from_json(const Json& j);

Json record_to_json(const SimConfig& c, const ReplicationRecord& r, const std::vector<double>& truths);
ReplicationRecord record_from_json(const Json& j);

std::string report_csv(const AggregateReport& report);

/// Doubles print with %.17g; absent values print as NA.
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);
Json optional_json(const std::optional<double>& v);
std::optional<double> json_optional(const Json& j);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

std::vector<double> parse_double_list(const std::string& text, const std::string& key);

}  // namespace ncc::io
