#include <ostream>
#include <sstream>

#include "chicle/runtime.hpp"

namespace chicle {

MetricsWriter::MetricsWriter(std::ostream& out) : out_(out) { out_ << kMetricsHeader << '\n' << std::flush; }

void MetricsWriter::write(const EpochReport& r) {
  std::ostringstream row;
  row.precision(17);
  row << r.record.epoch << ',' << r.record.time << ',' << r.record.workers << ',' << r.objectives.primal << ','
      << r.objectives.dual << ',' << r.objectives.gap << ',' << r.event << '\n';
  out_ << row.str() << std::flush;
}

}  // namespace chicle
