#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "stvs/core/error.hpp"
#include "stvs/core/hash.hpp"
#include "stvs/core/io.hpp"
#include "stvs/core/random.hpp"
#include "stvs/core/version.hpp"
#include "stvs/dynamics/simulate.hpp"
#include "stvs/features/features.hpp"
#include "stvs/grid/io.hpp"
#include "stvs/grid/model.hpp"
#include "stvs/nn/train.hpp"
#include "stvs/steady_state/power_flow.hpp"

namespace stvs {

/// Where the three-phase fault of each sample is placed.
enum class FaultPolicy {
    load_side,  ///< uniformly over non-generator buses
    any_bus,    ///< uniformly over all buses
    fixed,      ///< always DatasetSpec::fault_bus
};

inline const char* to_string(FaultPolicy p) noexcept {
    switch (p) {
        case FaultPolicy::any_bus: return "any-bus";
        case FaultPolicy::fixed: return "fixed";
        default: return "load-side";
    }
}

inline FaultPolicy fault_policy_from_string(const std::string& s) {
    if (s == "load-side") return FaultPolicy::load_side;
    if (s == "any-bus") return FaultPolicy::any_bus;
    if (s == "fixed") return FaultPolicy::fixed;
    throw ArgumentError("unknown fault policy '" + s + "' (load-side, any-bus, fixed)");
}

/// Everything that determines a generated dataset. Two specs that compare
/// equal produce byte-identical datasets regardless of the worker count.
struct DatasetSpec {
    std::string grid = "builtin:ne39";
    std::vector<LineId> outages;  ///< lines removed from the base grid
    std::size_t count = 1000;
    double load_min = 0.8, load_max = 1.2;
    double duration_min = 0.1, duration_max = 0.4;  ///< s
    FaultPolicy fault_policy = FaultPolicy::load_side;
    int fault_bus = 0;          ///< used by FaultPolicy::fixed
    std::uint64_t seed = 0;
    double t_on = 0.1;          ///< fault inception, s
    double post_fault = 5.0;    ///< simulated time after inception, s
    double dt = 0.01;           ///< s
    double t_w = 0.8;           ///< feature window length, s
    double window_offset = 0.0; ///< window start relative to fault inception, s
    double noise_mag = 0.0;     ///< PMU magnitude noise sigma, p.u.
    double noise_ang = 0.0;     ///< PMU angle noise sigma, degrees
    double min_class_fraction = 0.1;
    double rejection_budget = 4.0;  ///< candidate draws allowed, as a multiple of count
    int max_redraws = 10;           ///< operating-point redraws per sample

    void validate() const {
        if (count < 1) throw ArgumentError("sample count must be >= 1");
        if (!(load_min > 0.0 && load_min < load_max)) throw ArgumentError("load_scale range must satisfy 0 < min < max");
        if (!(duration_min > 0.0 && duration_min < duration_max))
            throw ArgumentError("fault duration range must satisfy 0 < min < max");
        if (!(dt > 0.0 && dt <= 0.02)) throw ArgumentError("dt must lie in (0, 0.02] s");
        if (!(t_on >= 0.0)) throw ArgumentError("fault inception time must be >= 0");
        if (!(t_w >= dt)) throw ArgumentError("window length must cover at least one step");
        if (!(window_offset >= 0.0)) throw ArgumentError("window offset must be >= 0");
        if (!(post_fault >= duration_max + 2.0)) throw ArgumentError("post-fault span must cover clearing plus 2 s");
        if (!(window_offset + t_w <= post_fault)) throw ArgumentError("window ends after the simulated span");
        if (!(noise_mag >= 0.0 && noise_ang >= 0.0)) throw ArgumentError("noise sigmas must be >= 0");
        if (!(min_class_fraction >= 0.0 && min_class_fraction < 0.5))
            throw ArgumentError("minimum class fraction must lie in [0, 0.5)");
        if (!(rejection_budget >= 1.0)) throw ArgumentError("rejection budget must be >= 1");
        if (max_redraws < 1) throw ArgumentError("redraw limit must be >= 1");
    }

    double horizon() const noexcept { return t_on + post_fault; }
    int window_cols() const noexcept { return static_cast<int>(std::llround(t_w / dt)); }
};

inline nlohmann::json to_json(const DatasetSpec& s) {
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& l : s.outages) lines.push_back(line_name(l));
    return {{"grid", s.grid},
            {"outages", lines},
            {"count", s.count},
            {"load_scale", {s.load_min, s.load_max}},
            {"fault_duration", {s.duration_min, s.duration_max}},
            {"fault_policy", to_string(s.fault_policy)},
            {"fault_bus", s.fault_bus},
            {"seed", s.seed},
            {"t_on", s.t_on},
            {"post_fault", s.post_fault},
            {"dt", s.dt},
            {"t_w", s.t_w},
            {"window_offset", s.window_offset},
            {"noise_mag", s.noise_mag},
            {"noise_ang_deg", s.noise_ang},
            {"min_class_fraction", s.min_class_fraction},
            {"rejection_budget", s.rejection_budget},
            {"max_redraws", s.max_redraws}};
}

inline DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
    DatasetSpec s;
    s.grid = j.at("grid").get<std::string>();
    for (const auto& l : j.at("outages")) {
        const auto parsed = parse_lines(l.get<std::string>());
        s.outages.insert(s.outages.end(), parsed.begin(), parsed.end());
    }
    s.count = j.at("count").get<std::size_t>();
    s.load_min = j.at("load_scale").at(0).get<double>();
    s.load_max = j.at("load_scale").at(1).get<double>();
    s.duration_min = j.at("fault_duration").at(0).get<double>();
    s.duration_max = j.at("fault_duration").at(1).get<double>();
    s.fault_policy = fault_policy_from_string(j.at("fault_policy").get<std::string>());
    s.fault_bus = j.at("fault_bus").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.t_on = j.at("t_on").get<double>();
    s.post_fault = j.at("post_fault").get<double>();
    s.dt = j.at("dt").get<double>();
    s.t_w = j.at("t_w").get<double>();
    s.window_offset = j.at("window_offset").get<double>();
    s.noise_mag = j.at("noise_mag").get<double>();
    s.noise_ang = j.at("noise_ang_deg").get<double>();
    s.min_class_fraction = j.at("min_class_fraction").get<double>();
    s.rejection_budget = j.at("rejection_budget").get<double>();
    s.max_redraws = j.at("max_redraws").get<int>();
    return s;
}

/// Scalar provenance of one sample.
struct SampleRecord {
    std::uint64_t id = 0;      ///< unique across topologies and seeds
    std::size_t candidate = 0; ///< draw index the sample came from
    double load_scale = 0.0;
    int fault_bus = 0;
    double fault_duration = 0.0;
    int label = 0;             ///< 1 = unstable
    double dwell = 0.0;        ///< longest sub-0.8 p.u. stretch, s
    int worst_bus = 0;
    bool collapsed = false;
    int redraws = 0;           ///< operating points rejected before this one
};

inline nlohmann::json to_json(const SampleRecord& r) {
    return {{"id", r.id},
            {"candidate", r.candidate},
            {"load_scale", r.load_scale},
            {"fault_bus", r.fault_bus},
            {"fault_duration", r.fault_duration},
            {"label", r.label},
            {"dwell", r.dwell},
            {"worst_bus", r.worst_bus},
            {"collapsed", r.collapsed},
            {"redraws", r.redraws}};
}

inline SampleRecord sample_record_from_json(const nlohmann::json& j) {
    SampleRecord r;
    r.id = j.at("id").get<std::uint64_t>();
    r.candidate = j.at("candidate").get<std::size_t>();
    r.load_scale = j.at("load_scale").get<double>();
    r.fault_bus = j.at("fault_bus").get<int>();
    r.fault_duration = j.at("fault_duration").get<double>();
    r.label = j.at("label").get<int>();
    r.dwell = j.at("dwell").get<double>();
    r.worst_bus = j.at("worst_bus").get<int>();
    r.collapsed = j.at("collapsed").get<bool>();
    r.redraws = j.at("redraws").get<int>();
    return r;
}

/// Generated samples: for each, an m x n feature window and the load-bus
/// voltage magnitudes over the same window (so measurement noise can be
/// applied later), both row-major float32, plus a SampleRecord.
struct LabeledDataset {
    DatasetSpec spec;
    std::string topology_id;
    std::vector<int> load_buses;  ///< row order of both blocks
    int rows = 0;
    int cols = 0;
    std::vector<SampleRecord> records;
    std::vector<float> features;
    std::vector<float> load_voltage;
    std::size_t candidates = 0;   ///< draws simulated to fill the set
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return records.size(); }
    std::size_t block() const noexcept { return static_cast<std::size_t>(rows) * cols; }

    std::size_t unstable_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(records.begin(), records.end(), [](const SampleRecord& r) { return r.label == 1; }));
    }

    Eigen::MatrixXd feature_matrix(std::size_t i) const { return block_matrix(features, i); }
    Eigen::MatrixXd voltage_matrix(std::size_t i) const { return block_matrix(load_voltage, i); }

    /// Feature windows of the selected samples (all when `idx` is empty).
    nn::WindowSet windows(const std::vector<std::size_t>& idx = {}) const {
        nn::WindowSet w;
        w.rows = rows;
        w.cols = cols;
        auto add = [&](std::size_t i) {
            if (i >= size()) throw ArgumentError("sample index out of range");
            w.x.insert(w.x.end(), features.begin() + static_cast<std::ptrdiff_t>(i * block()),
                       features.begin() + static_cast<std::ptrdiff_t>((i + 1) * block()));
            w.y.push_back(records[i].label);
            w.ids.push_back(records[i].id);
        };
        if (idx.empty())
            for (std::size_t i = 0; i < size(); ++i) add(i);
        else
            for (std::size_t i : idx) add(i);
        return w;
    }

    std::vector<int> labels() const {
        std::vector<int> y;
        for (const auto& r : records) y.push_back(r.label);
        return y;
    }

    /// Hash over shapes, records and both sample blocks.
    std::string content_hash() const {
        ContentHash h;
        h.text(topology_id);
        h.value(rows);
        h.value(cols);
        for (const auto& r : records) {
            h.value(r.id);
            h.value(r.load_scale);
            h.value(r.fault_bus);
            h.value(r.fault_duration);
            h.value(r.label);
            h.value(r.collapsed);
        }
        h.values(std::span<const float>(features));
        h.values(std::span<const float>(load_voltage));
        return h.hex();
    }

  private:
    Eigen::MatrixXd block_matrix(const std::vector<float>& v, std::size_t i) const {
        if (i >= size()) throw ArgumentError("sample index " + std::to_string(i) + " out of range");
        Eigen::MatrixXd m(rows, cols);
        const float* p = v.data() + i * block();
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = static_cast<double>(p[static_cast<std::size_t>(r) * cols + c]);
        return m;
    }
};

/// The grid a spec refers to, with its outages applied.
inline GridModel dataset_grid(const DatasetSpec& spec) {
    auto base = load_grid_source(spec.grid);
    return spec.outages.empty() ? base : disconnect_lines(base, spec.outages);
}

/// One simulated sample before balancing.
struct CandidateSample {
    SampleRecord record;
    Eigen::MatrixXf features;
    Eigen::MatrixXf load_voltage;
};

/// Feature rows for a window of load-bus magnitudes (m x n) with optional
/// measurement noise. Angles do not enter the features, so only magnitudes
/// are carried; angle noise still consumes its draws so the magnitude noise
/// matches that of a full-trajectory injection with the same seed.
inline Eigen::MatrixXd features_from_load_voltage(const Eigen::MatrixXd& v_load, const FeatureContext& ctx,
                                                  double sigma_mag, double sigma_ang_deg, std::uint64_t seed) {
    if (v_load.rows() != ctx.part.load_count()) throw ArgumentError("voltage block has the wrong number of rows");
    VoltageTrajectory tr;
    tr.dt = 1.0;
    tr.bus_ids = ctx.part.load_buses;
    tr.meta.topology_id = ctx.part.topology_id;
    tr.magnitude = v_load.transpose();
    tr.angle = Eigen::MatrixXd::Zero(tr.magnitude.rows(), tr.magnitude.cols());
    return build_features(inject_pmu_noise(tr, sigma_mag, sigma_ang_deg, seed), ctx.lm, ctx.part, ctx.v_gen);
}

namespace detail {

inline std::uint64_t topology_salt(const std::string& topology_id) {
    ContentHash h;
    h.text(topology_id);
    return h.digest();
}

inline std::vector<int> fault_candidates(const GridModel& grid, const DatasetSpec& spec) {
    switch (spec.fault_policy) {
        case FaultPolicy::fixed:
            if (!grid.has_bus(spec.fault_bus))
                throw ArgumentError("fault bus " + std::to_string(spec.fault_bus) + " does not exist");
            return {spec.fault_bus};
        case FaultPolicy::any_bus: {
            std::vector<int> ids;
            for (const auto& b : grid.buses()) ids.push_back(b.id);
            return ids;
        }
        default: return grid.load_buses();
    }
}

}  // namespace detail

/// Simulates candidate `index` of `spec` on `grid`. Operating points whose
/// power flow or machine initialization fails are redrawn from the same
/// per-sample stream up to spec.max_redraws times.
inline CandidateSample simulate_candidate(const GridModel& grid, const DatasetSpec& spec, std::size_t index) {
    const std::string topo = grid.topology_id();
    const std::uint64_t sample_seed = derive_seed(spec.seed, index);
    const auto buses = detail::fault_candidates(grid, spec);
    Rng rng(sample_seed);
    CandidateSample out;
    auto& rec = out.record;
    rec.id = derive_seed(sample_seed, detail::topology_salt(topo));
    rec.candidate = index;
    std::string last_error;
    for (int attempt = 0; attempt < spec.max_redraws; ++attempt) {
        rec.load_scale = rng.uniform(spec.load_min, spec.load_max);
        rec.fault_duration = rng.uniform(spec.duration_min, spec.duration_max);
        rec.fault_bus = buses[rng.below(buses.size())];
        rec.redraws = attempt;
        try {
            const auto op = solve_power_flow(grid, rec.load_scale);
            const FaultSpec fault{rec.fault_bus, spec.t_on, rec.fault_duration, 1e4};
            auto tr = simulate(grid, op, fault, spec.horizon(), spec.dt);
            tr.meta.seed = sample_seed;
            const auto ctx = feature_context(grid, op);
            const auto lab = label_trajectory(tr);
            rec.label = lab.label == Stability::unstable ? 1 : 0;
            rec.dwell = lab.dwell;
            rec.worst_bus = lab.worst_bus;
            rec.collapsed = tr.meta.collapsed;

            const auto start = static_cast<Eigen::Index>(std::llround((spec.t_on + spec.window_offset) / spec.dt));
            const Eigen::Index n = spec.window_cols();
            const Eigen::Index m = ctx.part.load_count();
            // Magnitudes of load buses over the window; a collapsed run
            // holds its last recorded sample.
            Eigen::MatrixXd vl(m, n);
            for (Eigen::Index r = 0; r < m; ++r) {
                const auto col = tr.column_of(ctx.part.load_buses[static_cast<std::size_t>(r)]);
                for (Eigen::Index c = 0; c < n; ++c)
                    vl(r, c) = tr.magnitude(std::min(start + c, tr.samples() - 1), col);
            }
            Eigen::MatrixXd f;
            if (spec.noise_mag > 0.0 || spec.noise_ang > 0.0) {
                f = features_from_load_voltage(vl, ctx, spec.noise_mag, spec.noise_ang, derive_seed(sample_seed, 1));
            } else {
                const auto full = hold_last(build_features(tr, ctx.lm, ctx.part, ctx.v_gen), start + n);
                f = extract_window(full, static_cast<double>(start) * spec.dt, static_cast<double>(n) * spec.dt,
                                   spec.dt)
                        .data;
            }
            out.features = f.cast<float>();
            out.load_voltage = vl.cast<float>();
            return out;
        } catch (const ConvergenceError& e) {
            last_error = e.what();
        } catch (const SingularMatrixError& e) {
            last_error = e.what();
        } catch (const ValidationError& e) {
            last_error = e.what();  // motor equilibrium does not exist at this point
        }
    }
    throw Error("sample " + std::to_string(index) + ": no solvable operating point after " +
                std::to_string(spec.max_redraws) + " draws (last: " + last_error + ")");
}

/// Simulates candidates [first, last) with up to `jobs` threads. Results are
/// placed by index, so the output does not depend on scheduling.
inline std::vector<CandidateSample> simulate_candidates(const GridModel& grid, const DatasetSpec& spec,
                                                        std::size_t first, std::size_t last, unsigned jobs,
                                                        const std::function<void(std::size_t)>& on_done = {}) {
    std::vector<CandidateSample> out(last - first);
    std::atomic<std::size_t> next{first};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= last) return;
            {
                std::lock_guard lock(mu);
                if (failure) return;
            }
            try {
                out[i - first] = simulate_candidate(grid, spec, i);
                if (on_done) {
                    std::lock_guard lock(mu);
                    on_done(i);
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(last - first)));
    if (jobs == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

struct GenerateOptions {
    unsigned jobs = 1;
    /// Called after each simulated candidate with the number done so far.
    std::function<void(std::size_t done)> progress;
};

/// Generates spec.count labeled samples. Candidates are drawn in index
/// order. If one class would end up under spec.min_class_fraction, candidates
/// of the over-represented class are skipped once it reaches its cap, until
/// spec.rejection_budget x count candidates have been drawn; after that the
/// earliest skipped candidates fill the remaining slots and a warning is
/// recorded.
inline LabeledDataset generate_dataset(const DatasetSpec& spec, const GenerateOptions& opts = {}) {
    spec.validate();
    const GridModel grid = dataset_grid(spec);
    LabeledDataset ds;
    ds.spec = spec;
    ds.topology_id = grid.topology_id();
    ds.load_buses = grid.load_buses();
    ds.rows = static_cast<int>(ds.load_buses.size());
    ds.cols = spec.window_cols();

    const auto min_count = static_cast<std::size_t>(std::ceil(spec.min_class_fraction * static_cast<double>(spec.count)));
    const std::size_t cap = spec.count - std::min(min_count, spec.count);
    const auto budget = static_cast<std::size_t>(std::ceil(spec.rejection_budget * static_cast<double>(spec.count)));
    std::array<std::size_t, 2> taken{0, 0};
    std::vector<CandidateSample> accepted, skipped;
    std::size_t done = 0;
    auto progress = [&](std::size_t) {
        ++done;
        if (opts.progress) opts.progress(done);
    };

    std::size_t drawn = 0;
    while (accepted.size() < spec.count && drawn < budget) {
        const std::size_t need = spec.count - accepted.size();
        const std::size_t chunk = std::min(budget - drawn, drawn == 0 ? need : std::max<std::size_t>(need, 16));
        auto batch = simulate_candidates(grid, spec, drawn, drawn + chunk, opts.jobs, progress);
        drawn += chunk;
        for (auto& c : batch) {
            if (accepted.size() == spec.count) break;
            auto& t = taken[static_cast<std::size_t>(c.record.label)];
            if (t < cap) {
                ++t;
                accepted.push_back(std::move(c));
            } else {
                skipped.push_back(std::move(c));
            }
        }
    }
    ds.candidates = drawn;
    if (accepted.size() < spec.count) {
        ds.warnings.push_back("rejection budget of " + std::to_string(budget) + " draws exhausted; class floor of " +
                              std::to_string(min_count) + " samples not reached");
        std::sort(skipped.begin(), skipped.end(),
                  [](const CandidateSample& a, const CandidateSample& b) { return a.record.candidate < b.record.candidate; });
        for (std::size_t k = 0; accepted.size() < spec.count; ++k) accepted.push_back(std::move(skipped[k]));
        std::sort(accepted.begin(), accepted.end(), [](const CandidateSample& a, const CandidateSample& b) {
            return a.record.candidate < b.record.candidate;
        });
    }
    for (auto& c : accepted) {
        ds.records.push_back(c.record);
        const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> f = c.features, v = c.load_voltage;
        ds.features.insert(ds.features.end(), f.data(), f.data() + f.size());
        ds.load_voltage.insert(ds.load_voltage.end(), v.data(), v.data() + v.size());
    }
    return ds;
}

inline constexpr std::array<char, 8> kSamplesMagic{'S', 'T', 'V', 'S', 'D', 'A', 'T', 'A'};
inline constexpr int kDatasetVersion = 1;

inline nlohmann::json manifest_json(const LabeledDataset& ds) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : ds.records) recs.push_back(to_json(r));
    const std::size_t unstable = ds.unstable_count();
    return {{"format", "stvs-dataset"},
            {"version", kDatasetVersion},
            {"stvs_version", kVersion},
            {"spec", to_json(ds.spec)},
            {"topology_id", ds.topology_id},
            {"load_buses", ds.load_buses},
            {"rows", ds.rows},
            {"cols", ds.cols},
            {"count", ds.size()},
            {"candidates", ds.candidates},
            {"class_mix", {{"unstable", unstable}, {"stable", ds.size() - unstable}}},
            {"content_hash", ds.content_hash()},
            {"warnings", ds.warnings},
            {"samples_file", "samples.bin"},
            {"records", recs}};
}

/// Writes `dir`/manifest.json and `dir`/samples.bin. The blob holds the magic,
/// u32 version, u32 rows, u32 cols, u64 count, then per sample the feature
/// window followed by the load-voltage window, row-major little-endian f32.
inline void save_dataset(const std::filesystem::path& dir, const LabeledDataset& ds) {
    std::filesystem::create_directories(dir);
    io::atomic_write(
        dir / "samples.bin",
        [&](std::ostream& os) {
            os.write(kSamplesMagic.data(), kSamplesMagic.size());
            io::write_pod(os, static_cast<std::uint32_t>(kDatasetVersion));
            io::write_pod(os, static_cast<std::uint32_t>(ds.rows));
            io::write_pod(os, static_cast<std::uint32_t>(ds.cols));
            io::write_pod(os, static_cast<std::uint64_t>(ds.size()));
            const auto bytes = static_cast<std::streamsize>(ds.block() * sizeof(float));
            for (std::size_t i = 0; i < ds.size(); ++i) {
                os.write(reinterpret_cast<const char*>(ds.features.data() + i * ds.block()), bytes);
                os.write(reinterpret_cast<const char*>(ds.load_voltage.data() + i * ds.block()), bytes);
            }
        },
        true);
    io::atomic_write_text(dir / "manifest.json", manifest_json(ds).dump(2) + "\n");
}

inline LabeledDataset load_dataset(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    LabeledDataset ds;
    std::string expected_hash;
    try {
        const auto j = nlohmann::json::parse(io::read_text(manifest_path));
        if (j.at("format").get<std::string>() != "stvs-dataset")
            throw IoError(manifest_path.string() + ": not a dataset manifest");
        if (j.at("version").get<int>() != kDatasetVersion)
            throw IoError(manifest_path.string() + ": unsupported dataset version");
        ds.spec = dataset_spec_from_json(j.at("spec"));
        ds.topology_id = j.at("topology_id").get<std::string>();
        ds.load_buses = j.at("load_buses").get<std::vector<int>>();
        ds.rows = j.at("rows").get<int>();
        ds.cols = j.at("cols").get<int>();
        ds.candidates = j.at("candidates").get<std::size_t>();
        ds.warnings = j.at("warnings").get<std::vector<std::string>>();
        for (const auto& r : j.at("records")) ds.records.push_back(sample_record_from_json(r));
        expected_hash = j.at("content_hash").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(manifest_path.string(), e.what());
    }

    const auto blob = dir / "samples.bin";
    std::ifstream is(blob, std::ios::binary);
    if (!is) throw IoError("cannot open " + blob.string());
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kSamplesMagic) throw IoError(blob.string() + ": not a sample blob");
    if (io::read_pod<std::uint32_t>(is) != static_cast<std::uint32_t>(kDatasetVersion))
        throw IoError(blob.string() + ": unsupported blob version");
    const auto rows = io::read_pod<std::uint32_t>(is), cols = io::read_pod<std::uint32_t>(is);
    const auto count = io::read_pod<std::uint64_t>(is);
    if (rows != static_cast<std::uint32_t>(ds.rows) || cols != static_cast<std::uint32_t>(ds.cols) ||
        count != ds.records.size())
        throw IoError(blob.string() + ": shape disagrees with the manifest");
    ds.features.resize(ds.size() * ds.block());
    ds.load_voltage.resize(ds.size() * ds.block());
    const auto bytes = static_cast<std::streamsize>(ds.block() * sizeof(float));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        is.read(reinterpret_cast<char*>(ds.features.data() + i * ds.block()), bytes);
        is.read(reinterpret_cast<char*>(ds.load_voltage.data() + i * ds.block()), bytes);
    }
    if (!is) throw IoError(blob.string() + ": truncated sample blob");
    if (is.peek() != std::char_traits<char>::eof()) throw IoError(blob.string() + ": trailing bytes");
    if (ds.content_hash() != expected_hash)
        throw IoError(dir.string() + ": content hash mismatch (manifest " + expected_hash + ", data " +
                      ds.content_hash() + ")");
    return ds;
}

}  // namespace stvs
