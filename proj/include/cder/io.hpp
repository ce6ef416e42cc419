#pragma once

// File formats for cloud collections.
//
// CSV: header `cloud_id,label,x0,...,x{D-1}[,weight]`, one row per point.
// Rows are grouped by cloud_id in first-appearance order; the dimension is
// taken from the header and enforced on every row.
//
// JSON: {"labels": [...], "clouds": [{"id":..., "label":..., "points":
// [[...],...], "weights": [...]? }]} where "label" is a name from the labels
// array (an integer index is also accepted on input).

#include "cder/core.hpp"

#include <iosfwd>
#include <string>

namespace cder {

CloudCollection read_collection_csv(std::istream& in, const std::string& source_name = "<stream>");
CloudCollection read_collection_json(std::istream& in, const std::string& source_name = "<stream>");

/// Dispatches on the file extension (.json vs anything else = CSV).
CloudCollection read_collection(const std::string& path);

void write_collection_csv(const CloudCollection& collection, std::ostream& out);
void write_collection_json(const CloudCollection& collection, std::ostream& out);
void write_collection(const CloudCollection& collection, const std::string& path);

/// Shortest round-trip decimal representation, shared by every writer so
/// CSV and JSON outputs of the same numbers agree.
std::string format_double(double value);

} // namespace cder
