#include "squidfit/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace squidfit {

std::string to_string(LineKind k) {
  return k == LineKind::qubit_line ? "qubit-line" : "resonator-line";
}

LineKind line_kind_from_string(const std::string& s) {
  if (s == "qubit-line") return LineKind::qubit_line;
  if (s == "resonator-line") return LineKind::resonator_line;
  throw std::invalid_argument("unknown line kind '" + s + "'");
}

void SpectroscopyDataset::validate() const {
  std::vector<std::string> errors;
  for (size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    auto complain = [&](const std::string& what) {
      errors.push_back("point " + std::to_string(i) + ": " + what);
    };
    if (!std::isfinite(p.phi_ext)) complain("phi_ext not finite");
    if (!(p.freq_ghz > 0.0) || !std::isfinite(p.freq_ghz))
      complain("freq_ghz must be positive");
    if (!(p.weight > 0.0) || !std::isfinite(p.weight))
      complain("weight must be positive");
  }
  if (meta.max_photon_replicas < 0)
    errors.push_back("meta: max_photon_replicas must be >= 0");
  if (!errors.empty()) {
    std::ostringstream msg;
    msg << "dataset validation failed (" << errors.size() << " problems):";
    for (const auto& e : errors) msg << "\n  - " << e;
    throw std::invalid_argument(msg.str());
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

SpectroscopyDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  SpectroscopyDataset dataset;
  std::vector<std::string> errors;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("phi_ext", 0) == 0) continue;  // header
    const auto fields = split_csv_line(line);
    if (fields.size() != 5) {
      errors.push_back("line " + std::to_string(line_no) +
                       ": expected 5 columns, got " +
                       std::to_string(fields.size()));
      continue;
    }
    SpectroscopyPoint p;
    if (!parse_double(fields[0], p.phi_ext))
      errors.push_back("line " + std::to_string(line_no) + ": bad phi_ext");
    if (!parse_double(fields[1], p.freq_ghz))
      errors.push_back("line " + std::to_string(line_no) + ": bad freq_ghz");
    p.label = fields[2];
    if (fields[3].empty()) {
      p.weight = 1.0;
    } else if (!parse_double(fields[3], p.weight)) {
      errors.push_back("line " + std::to_string(line_no) + ": bad weight");
    }
    try {
      p.kind = line_kind_from_string(fields[4]);
    } catch (const std::exception& e) {
      errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
    dataset.points.push_back(std::move(p));
  }
  if (!errors.empty()) {
    std::ostringstream msg;
    msg << "dataset parse failed (" << errors.size() << " problems):";
    for (const auto& e : errors) msg << "\n  - " << e;
    throw std::runtime_error(msg.str());
  }
  dataset.validate();
  return dataset;
}

void write_dataset_csv(const std::string& path,
                       const SpectroscopyDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  out << "phi_ext,freq_ghz,label,weight,kind\n";
  char buf[128];
  for (const auto& p : dataset.points) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%s,%.9g,%s\n", p.phi_ext,
                  p.freq_ghz, p.label.c_str(), p.weight,
                  to_string(p.kind).c_str());
    out << buf;
  }
}

}  // namespace squidfit
