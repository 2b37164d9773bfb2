#ifndef BCP_CACHE_HPP
#define BCP_CACHE_HPP

#include <optional>
#include <ostream>
#include <string>

#include "bcp/spectrum.hpp"

namespace bcp {

/// Digest of the solver parameters that change computed eigenvalues
/// (everything but the window size).
std::string params_digest(const SweepOptions& options);

/// On-disk spectra: <dir>/<problem digest>/<params digest>.{csv,json}.
class SpectrumCache {
 public:
  explicit SpectrumCache(std::string dir) : dir_(std::move(dir)) {}

  /// A cached spectrum covering the requested window, truncated to it.
  /// Corrupt entries are reported on `warnings` and ignored.
  std::optional<Spectrum> lookup(const std::string& problem_digest, const SweepOptions& options,
                                 std::ostream* warnings = nullptr) const;
  /// Stores unless an entry with a larger window exists.
  void store(const Spectrum& spectrum) const;

  std::string entry_path(const std::string& problem_digest, const SweepOptions& options) const;

 private:
  std::string dir_;
};

/// Restricts a spectrum to a smaller window (lambda_hi or max_count).
std::optional<Spectrum> truncate_spectrum(const Spectrum& spectrum, const SweepOptions& options);

/// Cached eigenvalue computation.
Spectrum cached_eigenvalues(const BoundaryContactProblem& problem, const SweepOptions& options,
                            const std::string& cache_dir, std::ostream* warnings = nullptr);

}  // namespace bcp

#endif  // BCP_CACHE_HPP
