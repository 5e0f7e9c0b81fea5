#include "squidfit/classify.hpp"

#include <cmath>

#include "squidfit/constants.hpp"

namespace squidfit {

std::string to_string(QubitRegime r) {
  switch (r) {
    case QubitRegime::flux: return "flux";
    case QubitRegime::fluxonium: return "fluxonium";
    case QubitRegime::quasi_charge: return "quasi-charge";
    case QubitRegime::weakly_anharmonic: return "weakly-anharmonic";
  }
  return "unknown";
}

RegimeReport classify(const QubitParams& p) {
  p.validate();
  RegimeReport report;
  report.ratio_ej_ec = p.e_j / p.e_c;
  report.ratio_el_ec = p.e_l / p.e_c;
  report.phase_zpf = phase_zpf(p);
  report.z_c_over_rq =
      report.phase_zpf * report.phase_zpf / 3.14159265358979324;
  report.z_c_ohm = report.z_c_over_rq * constants::resistance_quantum;

  const bool heavy = report.ratio_ej_ec >= 1.0;
  const bool high_impedance = report.z_c_over_rq >= 1.0;
  if (heavy)
    report.label = high_impedance ? QubitRegime::fluxonium : QubitRegime::flux;
  else
    report.label = high_impedance ? QubitRegime::quasi_charge
                                  : QubitRegime::weakly_anharmonic;
  return report;
}

}  // namespace squidfit
