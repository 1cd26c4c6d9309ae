#pragma once

#include "wavemech/field.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace wavemech {

/// Snapshot file layout: one line of JSON
///   {"dims":[...],"extents":[[min,max],...],"dt":..,"time_label":..,"field_name":"..","boundary":".."}
/// terminated by '\n', followed by the values as little-endian complex64
/// pairs (float32 re, float32 im) in row-major order, axis 0 slowest.
struct Snapshot {
  ComplexField field;
  std::string field_name;
};

void write_snapshot(std::ostream& out, const ComplexField& field, const std::string& field_name);
void write_snapshot(const std::filesystem::path& path, const ComplexField& field, const std::string& field_name);
/// Real-valued derived fields (amplitude, Q, ...) are stored with im = 0.
void write_snapshot(const std::filesystem::path& path, const RealField& field, const std::string& field_name);

Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

/// CSV with columns x[,y[,z]],re,im; one row per node in storage order.
void write_csv(std::ostream& out, const ComplexField& field);
void write_csv(const std::filesystem::path& path, const ComplexField& field);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

}  // namespace wavemech
