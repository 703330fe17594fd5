#include "rps_spde/error.hpp"

namespace rps {

const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::ok: return "Ok";
    case Errc::zero_eigenvalue: return "ZeroEigenvalue";
    case Errc::grid_too_coarse: return "GridTooCoarse";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::negative_time: return "NegativeTime";
    case Errc::non_finite_drift: return "NonFiniteDrift";
    case Errc::grid_misaligned: return "GridMisaligned";
    case Errc::out_of_extent: return "OutOfExtent";
    case Errc::wrong_time_sign: return "WrongTimeSign";
    case Errc::window_exceeds_extent: return "WindowExceedsExtent";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::divergent_series: return "DivergentSeries";
    case Errc::singular_system: return "SingularSystem";
    case Errc::parse_error: return "ParseError";
    case Errc::validation_error: return "ValidationError";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::io_error: return "IoError";
    case Errc::internal: return "Internal";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), message_(what) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace rps
