#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mrsl/rsl.hpp"
#include "mrsl/samplers.hpp"

namespace mrsl {

/// Points file: "# mrsl-points v1 fingerprint=<hex> D=<D> n=<n> latent=<0|1>"
/// then one comma-separated row per point: D observed coordinates, D latent
/// coordinates when latent=1, and the origin tag. Headerless files are read
/// as bare coordinate rows with origin 0.
void write_points(std::ostream& os, const LabeledSample& sample);
LabeledSample read_points(std::istream& is);

/// "n <n>", "A <i> <activation>" sorted by radius then index, then
/// "M <radius> <a> <b>" in event order.
void write_dendrogram(std::ostream& os, const Dendrogram& dendrogram);
Dendrogram read_dendrogram(std::istream& is);

/// "n <n>" then one "C <min> <count> <members...>" line per component.
void write_partition(std::ostream& os, const Partition& partition, std::size_t n);
Partition read_partition(std::istream& is);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// strtod over the whole token (accepts inf); throws InvalidArgument otherwise.
double parse_double(const std::string& token);
std::size_t parse_size(const std::string& token);
std::vector<std::string> split(const std::string& text, char sep);
std::string trim(const std::string& text);

}  // namespace mrsl
