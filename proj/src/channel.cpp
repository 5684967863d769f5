#include "dyadflow/channel.hpp"

#include <cmath>

namespace dyadflow {

Channel make_channel(std::vector<double> samples, double fs, std::string label) {
  Channel c{std::move(samples), fs, std::move(label)};
  validate_channel(c);
  return c;
}

void validate_channel(const Channel& x) {
  if (x.fs <= 0.0) {
    throw Error("invalid-rate", "sampling rate must be positive, got " + std::to_string(x.fs));
  }
  for (size_t i = 0; i < x.samples.size(); ++i) {
    if (!std::isfinite(x.samples[i])) {
      throw Error("non-finite-sample", "channel '" + x.label + "' sample " + std::to_string(i) +
                                           " is not finite");
    }
  }
}

}  // namespace dyadflow
