#pragma once

// Synchronization matrix (functional rows x time periods) and the canonical
// plan document.

#include <string>
#include <string_view>
#include <vector>

#include "coaplan/plan.hpp"

namespace coaplan {

struct MatrixCell {
  std::string activity;
  std::string unit;
  std::string label;
  bool questionable = false;

  bool operator==(const MatrixCell&) const = default;
};

struct MatrixColumn {
  Minutes start = 0;
  Minutes end = 0;  // exclusive
  std::string label;

  bool operator==(const MatrixColumn&) const = default;
};

struct SyncMatrix {
  Minutes period = 60;
  std::vector<std::string> rows;
  std::vector<MatrixColumn> columns;
  std::vector<std::vector<std::vector<MatrixCell>>> cells;  // [row][column], ordered by (start, activity)

  bool operator==(const SyncMatrix&) const = default;
};

// "H+1:30" for 90.
std::string period_label(Minutes t);

// Leaves only. Columns cover [0, horizon) and at least one period; an
// instantaneous leaf sits in the column containing its start.
SyncMatrix build_matrix(const Plan& plan, Minutes period);
Json matrix_to_json(const SyncMatrix& m);
// Header row of period labels; first column the functional row; every field quoted.
std::string matrix_csv(const SyncMatrix& m);

enum class ExportFormat { canonical, matrix_csv };

Json export_plan_json(const Plan& plan);
std::string export_plan(const Plan& plan, ExportFormat format = ExportFormat::canonical, Minutes period = 0);

// Digest of the canonical document without its plan_digest field.
std::string compute_plan_digest(const Plan& plan);

// Throws ParseError (with byte offset) for malformed text, SchemaError for a
// wrong kind or schema version, and Error when the embedded digest does not
// match the content.
Plan import_plan(std::string_view text);
Plan import_plan_json(const Json& doc);

}  // namespace coaplan
