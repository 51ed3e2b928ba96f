// CSV emission. All numerics use 17 significant digits so values round-trip
// exactly through parse; files use LF line endings.

#pragma once

#include <string>
#include <vector>

#include "ddso/asymptotics.hpp"
#include "ddso/harness.hpp"

namespace ddso {

// %.17g formatting.
std::string fmt17(double v);

std::string regret_csv(const RegretTable& table);
std::string summary_csv(const SummaryTable& summary, const std::vector<double>& c1);
std::string covmodel_csv(const CovModel& cov);
std::string limitlaw_samples_csv(const std::vector<Method>& methods,
                                 const std::vector<std::vector<double>>& samples);
std::string misspec_csv(const MisspecLimits& limits);
std::string limits_csv(const std::vector<LimitComparisonEntry>& entries);
// One line per gamma: medians per method at the largest n plus the ordering
// flag sign(median SAA - median ETO).
std::string sweep_csv(const std::vector<double>& gammas,
                      const std::vector<SummaryTable>& summaries);

void write_file(const std::string& path, const std::string& content);

}  // namespace ddso
