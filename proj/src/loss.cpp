#include "cocoa/loss.hpp"

#include <sstream>

namespace cocoa {

std::string LossModel::name() const {
  switch (family) {
    case LossFamily::hinge: return "hinge";
    case LossFamily::logistic: return "logistic";
    case LossFamily::smoothed_hinge: {
      std::ostringstream out;
      out << "smoothed_hinge:" << smoothing;
      return out.str();
    }
  }
  return "unknown";
}

LossModel LossModel::parse(const std::string& text) {
  if (text == "hinge") return hinge();
  if (text == "logistic") return logistic();
  if (text == "smoothed_hinge") return smoothed_hinge(1.0);
  const std::string prefix = "smoothed_hinge:";
  if (text.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    double width = 0.0;
    try {
      width = std::stod(text.substr(prefix.size()), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() - prefix.size() || !(width > 0.0))
      throw ConfigError("bad smoothing width in loss '" + text + "'");
    return smoothed_hinge(width);
  }
  throw ConfigError("unknown loss '" + text + "' (expected hinge, smoothed_hinge[:width], logistic)");
}

}  // namespace cocoa
