#include "lhv/error.hpp"

namespace lhv {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::space_mismatch: return "space mismatch";
    case ErrorCode::evaluation: return "evaluation error";
    case ErrorCode::degenerate_measure: return "degenerate measure";
    case ErrorCode::negative_density: return "negative density";
    case ErrorCode::empty_ensemble: return "empty ensemble";
    case ErrorCode::unsupported_representation: return "unsupported representation";
    case ErrorCode::stability: return "stability violation";
    case ErrorCode::coefficient: return "coefficient error";
    case ErrorCode::config: return "configuration error";
    case ErrorCode::unknown_setting: return "unknown setting";
    case ErrorCode::missing_spectrum: return "missing spectrum";
    case ErrorCode::degenerate_subensemble: return "degenerate sub-ensemble";
    case ErrorCode::unsupported_model: return "unsupported model";
    case ErrorCode::io: return "I/O error";
  }
  return "error";
}

}  // namespace lhv
