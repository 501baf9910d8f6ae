#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpdist/geometry.hpp"
#include "dpdist/mlp.hpp"

namespace dpdist {

enum class MethodTag { dpdist, dpdist_one_sided, chamfer, emd, hausdorff, partial_hausdorff };

/// A pluggable cloud-to-cloud distance. Learned tags borrow the model, which
/// must outlive the method.
struct DistanceMethod {
    MethodTag tag = MethodTag::chamfer;
    const MlpModel* model = nullptr;
    double fraction = 1.0;  // partial_hausdorff only

    /// Accepts dpdist, dpdist-one-sided, cd, emd, hausdorff and ph:<f> (or
    /// PH(<f>)), case-insensitively. Throws ArgumentError otherwise.
    static DistanceMethod parse(std::string_view name, const MlpModel* model = nullptr);
    std::string name() const;
    bool learned() const noexcept { return tag == MethodTag::dpdist || tag == MethodTag::dpdist_one_sided; }
    /// Throws ArgumentError when a learned tag has no usable model or f is
    /// outside (0, 1].
    void validate() const;
};

/// Symmetric: mean SPD of A's points against B's grid plus the converse.
/// One-sided: the first term only. Throws EmptyInputError on an empty cloud.
double dpdist(const MlpModel& model, const PointCloud& a, const PointCloud& b, bool symmetric = true);

/// D(a, b) for any method. For the one-sided measure a is queried against b.
double evaluate_distance(const DistanceMethod& method, const PointCloud& a, const PointCloud& b);

/// `count` pairwise disjoint clouds of n points each: farthest-point sample
/// count*n points from a dense surface sample, then split at random.
std::vector<PointCloud> disjoint_samples(const TriangleMesh& mesh, std::size_t n, std::size_t count, std::uint64_t seed);
std::pair<PointCloud, PointCloud> evaluation_pair_sampler(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

struct DetectionCurve {
    std::vector<double> magnitudes;
    std::vector<double> accuracy;
    std::vector<std::size_t> trials;
    std::vector<std::size_t> successes;
};

struct DetectionOptions {
    std::size_t cloud_size = 64;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    /// S_C = S_A and S_B = T(S_A) instead of independent resamples.
    bool identical_samples = false;
    std::size_t threads = 1;
};

/// Per trial: S_A, S_B, S_C from one mesh, S_B moved by a 26-direction
/// transform; success iff D(S_C, S_A) < D(S_B, S_A). Meshes are used in turn.
DetectionCurve translation_detection(const DistanceMethod& method, const std::vector<TriangleMesh>& meshes,
                                     const std::vector<double>& magnitudes, const DetectionOptions& options);
/// As translation_detection with rotations; magnitudes in degrees.
DetectionCurve rotation_detection(const DistanceMethod& method, const std::vector<TriangleMesh>& meshes,
                                  const std::vector<double>& angles_deg, const DetectionOptions& options);

/// Fraction of objects whose own resample ranks within the m closest of
/// {own resample} + {one sample of every other object}. Ties count against
/// the object. Requires at least two objects and 1 <= m <= object count.
double identification_topm(const DistanceMethod& method, const std::vector<TriangleMesh>& objects, std::size_t n,
                           std::size_t m, std::uint64_t seed, std::size_t threads = 1);

struct RegistrationOptions {
    std::size_t iterations = 200;
    double initial_step = 0.05;
    double min_step = 1e-6;
    double epsilon = 1e-4;
};

struct RegistrationResult {
    RigidTransform estimated;
    RigidTransform ground_truth;
    double rotation_error_deg = 0.0;
    double translation_error = 0.0;
    std::size_t iterations = 0;
    double final_loss = 0.0;
    bool diverged = false;
};

/// Minimizes loss(T(source), template) over an axis-angle rotation and a
/// translation. Central-difference gradient, normalized step of fixed length
/// halved whenever it fails to improve. Returns the best transform seen;
/// errors are left at 0 (see score_registration).
RegistrationResult register_clouds(const PointCloud& source, const PointCloud& templ, const DistanceMethod& loss,
                                   const RegistrationOptions& options);

/// Fills the ground truth and the rotation (degrees) and translation errors.
void score_registration(RegistrationResult& result, const RigidTransform& ground_truth);

struct RegistrationBenchOptions {
    std::size_t cloud_size = 64;
    std::size_t trials = 50;
    std::uint64_t seed = 0;
    /// Template and source drawn from the same sample instead of disjoint ones.
    bool identical_samples = false;
    double max_angle_deg = 45.0;
    double max_translation = 0.1;
    RegistrationOptions solver;
    std::size_t threads = 1;
};

/// Per trial: template S_B, source T(S_A') with T random in the configured
/// ranges; the recovered transform is compared with T^-1.
std::vector<RegistrationResult> registration_benchmark(const DistanceMethod& loss,
                                                       const std::vector<TriangleMesh>& meshes,
                                                       const RegistrationBenchOptions& options);

/// Fraction of results with both errors at or below the thresholds.
/// Throws ArgumentError for an empty sequence.
double success_ratio(const std::vector<RegistrationResult>& results, double max_rotation_deg,
                     double max_translation);

/// Row-major XY grid at height z: value(r, c) at (x0 + c*dx, y0 + r*dy, z).
struct FieldSlice {
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    double z = 0.0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const noexcept { return values[r * cols + c]; }
};

/// resolution^2 learned distances over [-extent, extent]^2 against the cloud.
FieldSlice field_slice(const MlpModel& model, const PointCloud& cloud, double z, std::size_t resolution,
                       double extent);
/// Same lattice with the exact distance to the nearest cloud point.
FieldSlice field_slice_nearest(const PointCloud& cloud, double z, std::size_t resolution, double extent);

/// magnitude,accuracy,trials
std::string detection_csv(const DetectionCurve& curve);
/// method,magnitude,accuracy,trials for several curves.
std::string detection_table_csv(const std::vector<std::pair<std::string, DetectionCurve>>& curves);
/// trial,rotation_error_deg,translation_error,iterations,final_loss,diverged
std::string registration_csv(const std::vector<RegistrationResult>& results);
/// Header x0,y0,dx,dy,z, their values, then one line per grid row.
std::string field_slice_csv(const FieldSlice& slice);

}  // namespace dpdist
