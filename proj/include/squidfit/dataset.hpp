#pragma once

#include <string>
#include <vector>

// Spectroscopy observations: flux/frequency points with optional transition
// labels. On disk this is a CSV with header
//
//   phi_ext,freq_ghz,label,weight,kind
//
// where label uses the q:0-1 / q:0-2 / q:0-1+1ph / r:disp vocabulary (empty
// = unassigned, matched to the nearest model line during fitting) and kind
// is "qubit-line" or "resonator-line".

namespace squidfit {

enum class LineKind { qubit_line, resonator_line };

std::string to_string(LineKind k);
LineKind line_kind_from_string(const std::string& s);

struct SpectroscopyPoint {
  double phi_ext = 0.0;
  double freq_ghz = 0.0;
  std::string label;  // empty = unassigned
  double weight = 1.0;
  LineKind kind = LineKind::qubit_line;
};

struct DatasetMeta {
  double kappa_tot_mhz = 0.0;  // readout linewidth, recorded only
  std::string notes;
  int max_photon_replicas = 0;  // replica lines admitted as candidates
};

struct SpectroscopyDataset {
  std::vector<SpectroscopyPoint> points;
  DatasetMeta meta;

  // Collects every violation and throws one error listing all of them.
  void validate() const;
};

SpectroscopyDataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path,
                       const SpectroscopyDataset& dataset);

}  // namespace squidfit
