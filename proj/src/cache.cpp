#include "bcp/cache.hpp"

#include <filesystem>

#include "bcp/io.hpp"

namespace bcp {

namespace fs = std::filesystem;
using nlohmann::json;

std::string params_digest(const SweepOptions& o) {
  json j{{"grid_factor", o.grid_factor},
         {"max_refinements", o.max_refinements},
         {"force_numeric", o.force_numeric},
         {"refine_tol", o.refine_tol},
         {"multiplicity_threshold", o.multiplicity_threshold},
         {"clusters_per_contour", o.clusters_per_contour}};
  if (o.lambda_lo) j["lambda_lo"] = *o.lambda_lo;
  return sha256_hex(j.dump()).substr(0, 16);
}

std::string SpectrumCache::entry_path(const std::string& problem_digest, const SweepOptions& options) const {
  return (fs::path(dir_) / problem_digest / params_digest(options)).string();
}

std::optional<Spectrum> truncate_spectrum(const Spectrum& s, const SweepOptions& options) {
  Spectrum out = s;
  out.options = options;
  out.eigenvalues.clear();
  out.multiplicities.clear();
  double hi = s.lambda_hi;
  if (options.max_count) {
    int acc = 0;
    std::size_t i = 0;
    for (; i < s.eigenvalues.size() && acc < *options.max_count; ++i) acc += s.multiplicities[i];
    if (acc < *options.max_count) return std::nullopt;
    if (i < s.eigenvalues.size()) hi = 0.5 * (s.eigenvalues[i - 1] + s.eigenvalues[i]);
  } else {
    if (options.lambda_hi > s.lambda_hi) return std::nullopt;
    hi = options.lambda_hi;
  }
  for (std::size_t i = 0; i < s.eigenvalues.size() && s.eigenvalues[i] <= hi; ++i) {
    out.eigenvalues.push_back(s.eigenvalues[i]);
    out.multiplicities.push_back(s.multiplicities[i]);
  }
  out.lambda_hi = hi;
  out.certificate.clear();
  for (const auto& c : s.certificate)
    if (c.a < hi) out.certificate.push_back(c);
  return out;
}

namespace {

std::optional<Spectrum> read_entry(const std::string& base, std::ostream* warnings) {
  if (!fs::exists(base + ".json") || !fs::exists(base + ".csv")) return std::nullopt;
  try {
    const json meta = json::parse(read_file(base + ".json"));
    const std::string csv = read_file(base + ".csv");
    if (meta.at("csv_sha256").get<std::string>() != sha256_hex(csv)) throw InputError("checksum mismatch");
    return spectrum_from(csv, meta);
  } catch (const std::exception& e) {
    if (warnings) *warnings << "warning: ignoring corrupt cache entry " << base << " (" << e.what() << ")\n";
    return std::nullopt;
  }
}

}  // namespace

std::optional<Spectrum> SpectrumCache::lookup(const std::string& problem_digest, const SweepOptions& options,
                                              std::ostream* warnings) const {
  auto stored = read_entry(entry_path(problem_digest, options), warnings);
  if (!stored || stored->digest != problem_digest) return std::nullopt;
  return truncate_spectrum(*stored, options);
}

void SpectrumCache::store(const Spectrum& spectrum) const {
  const std::string base = entry_path(spectrum.digest, spectrum.options);
  if (auto existing = read_entry(base, nullptr); existing && existing->lambda_hi >= spectrum.lambda_hi) return;
  const std::string csv = spectrum_csv(spectrum);
  json meta = spectrum_metadata(spectrum);
  meta["csv_sha256"] = sha256_hex(csv);
  write_file_atomic(base + ".csv", csv);
  write_file_atomic(base + ".json", meta.dump(2) + "\n");
}

Spectrum cached_eigenvalues(const BoundaryContactProblem& problem, const SweepOptions& options,
                            const std::string& cache_dir, std::ostream* warnings) {
  if (cache_dir.empty()) return eigenvalues(problem, options);
  SpectrumCache cache(cache_dir);
  const std::string digest = canonical_hash(problem);
  if (auto hit = cache.lookup(digest, options, warnings)) return *hit;
  Spectrum fresh = eigenvalues(problem, options);
  cache.store(fresh);
  return fresh;
}

}  // namespace bcp
