#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "betagan/errors.hpp"
#include "betagan/numio.hpp"

namespace betagan {

/// One alternating iteration: a discriminator update followed by a generator
/// update. tau counts gradient evaluations, one per network update, so each
/// record advances tau by exactly two.
struct TraceRecord {
    std::size_t step;   // 1-based global iteration index
    double beta;        // 0 = uniform stage, +inf = empirical stage
    double loss_d;
    double loss_g;
    double d_real;      // mean D over the real minibatch
    double d_fake;      // mean D over the fake minibatch
    std::uint64_t tau;  // cumulative gradient evaluations
};

struct TrainingTrace {
    std::vector<TraceRecord> records;
    std::string generator_loss;  // "saturating" | "non_saturating"

    std::uint64_t final_tau() const { return records.empty() ? 0 : records.back().tau; }
    std::size_t next_step() const { return records.empty() ? 1 : records.back().step + 1; }

    void write_csv(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write trace " + path.string());
        out << "step,beta,loss_d,loss_g,d_real,d_fake,tau\n";
        for (const TraceRecord& r : records) {
            out << r.step << ',' << format_double(r.beta) << ',' << format_double(r.loss_d)
                << ',' << format_double(r.loss_g) << ',' << format_double(r.d_real) << ','
                << format_double(r.d_fake) << ',' << r.tau << '\n';
        }
        if (!out) throw IoError("write failed for trace " + path.string());
    }
};

}  // namespace betagan
