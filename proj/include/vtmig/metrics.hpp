#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vtmig/common.hpp"

namespace vtmig {

/// One metric observation. step < 0 marks episode-level records.
struct MetricsRecord {
    std::string run_id;
    std::string algorithm;
    std::uint64_t seed = 0;
    int episode = 0;
    int step = -1;
    std::string metric;
    double value = 0.0;
};

/// Append-only CSV sink; one file per (run, algorithm).
class MetricsSink {
public:
    MetricsSink(const std::string& dir, const std::string& run_id, const std::string& algorithm)
        : run_id_(run_id), algorithm_(algorithm) {
        std::filesystem::create_directories(dir);
        path_ = dir + "/" + algorithm + ".csv";
        out_.open(path_);
        if (!out_) throw std::runtime_error("metrics sink: cannot open " + path_);
        out_ << "run,algorithm,seed,episode,step,metric,value\n";
    }

    const std::string& path() const { return path_; }

    void append(std::uint64_t seed, int episode, int step, const std::string& metric,
                double value) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", value);
        out_ << run_id_ << ',' << algorithm_ << ',' << seed << ',' << episode << ',' << step << ','
             << metric << ',' << buf << '\n';
    }

    void flush() { out_.flush(); }

private:
    std::string run_id_;
    std::string algorithm_;
    std::string path_;
    std::ofstream out_;
};

inline std::vector<MetricsRecord> read_metrics_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("metrics: cannot open " + path);
    std::vector<MetricsRecord> records;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        MetricsRecord r;
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, r.run_id, ',');
        std::getline(ss, r.algorithm, ',');
        std::getline(ss, field, ',');
        r.seed = std::stoull(field);
        std::getline(ss, field, ',');
        r.episode = std::stoi(field);
        std::getline(ss, field, ',');
        r.step = std::stoi(field);
        std::getline(ss, r.metric, ',');
        std::getline(ss, field, ',');
        r.value = std::stod(field);
        records.push_back(std::move(r));
    }
    return records;
}

/// All metric CSVs under one run directory.
inline std::vector<MetricsRecord> read_metrics_dir(const std::string& dir) {
    std::vector<MetricsRecord> all;
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto part = read_metrics_file(f);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

}  // namespace vtmig
