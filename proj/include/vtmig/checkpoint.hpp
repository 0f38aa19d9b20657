#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtmig/gcn.hpp"
#include "vtmig/nn.hpp"

namespace vtmig {

/// Versioned binary parameter container: a sequence of named double blobs,
/// tied to the config that produced them via the config hash.
class CheckpointWriter {
public:
    CheckpointWriter(const std::string& path, std::uint64_t config_hash) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("checkpoint: cannot open " + path);
        const char magic[4] = {'V', 'T', 'M', 'C'};
        out_.write(magic, 4);
        write_u32(1);  // format version
        write_u64(config_hash);
    }

    void add(const std::string& name, const std::vector<double>& data) {
        write_u32(static_cast<std::uint32_t>(name.size()));
        out_.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u64(data.size());
        out_.write(reinterpret_cast<const char*>(data.data()),
                   static_cast<std::streamsize>(data.size() * sizeof(double)));
    }

    void add(const std::string& name, const Mlp& net) { add(name, net.flatten()); }

    void add(const std::string& name, const Gcn& gcn) {
        std::vector<double> flat;
        for (const auto& l : gcn.layers())
            flat.insert(flat.end(), l.weight.data(), l.weight.data() + l.weight.size());
        add(name, flat);
    }

private:
    void write_u32(std::uint32_t v) { out_.write(reinterpret_cast<const char*>(&v), 4); }
    void write_u64(std::uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
    std::ofstream out_;
};

class CheckpointReader {
public:
    explicit CheckpointReader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw std::runtime_error("checkpoint: cannot open " + path);
        char magic[4];
        in_.read(magic, 4);
        if (!in_ || magic[0] != 'V' || magic[1] != 'T' || magic[2] != 'M' || magic[3] != 'C')
            throw std::runtime_error("checkpoint: bad magic in " + path);
        if (read_u32() != 1) throw std::runtime_error("checkpoint: unsupported version");
        config_hash_ = read_u64();
        while (true) {
            std::uint32_t nlen;
            if (!in_.read(reinterpret_cast<char*>(&nlen), 4)) break;
            std::string name(nlen, '\0');
            in_.read(name.data(), nlen);
            const std::uint64_t count = read_u64();
            std::vector<double> data(count);
            in_.read(reinterpret_cast<char*>(data.data()),
                     static_cast<std::streamsize>(count * sizeof(double)));
            if (!in_) throw std::runtime_error("checkpoint: truncated blob " + name);
            names_.push_back(name);
            blobs_.push_back(std::move(data));
        }
    }

    std::uint64_t config_hash() const { return config_hash_; }

    const std::vector<double>& blob(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return blobs_[i];
        throw std::runtime_error("checkpoint: missing blob " + name);
    }

    void restore(const std::string& name, Mlp& net) const { net.unflatten(blob(name)); }

    void restore(const std::string& name, Gcn& gcn) const {
        const auto& flat = blob(name);
        std::size_t k = 0;
        for (auto& l : gcn.layers()) {
            if (k + static_cast<std::size_t>(l.weight.size()) > flat.size())
                throw std::runtime_error("checkpoint: blob too short for gcn");
            std::copy(flat.begin() + static_cast<long>(k),
                      flat.begin() + static_cast<long>(k + l.weight.size()), l.weight.data());
            k += static_cast<std::size_t>(l.weight.size());
        }
    }

private:
    std::uint32_t read_u32() {
        std::uint32_t v = 0;
        in_.read(reinterpret_cast<char*>(&v), 4);
        return v;
    }
    std::uint64_t read_u64() {
        std::uint64_t v = 0;
        in_.read(reinterpret_cast<char*>(&v), 8);
        return v;
    }
    std::ifstream in_;
    std::uint64_t config_hash_ = 0;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> blobs_;
};

}  // namespace vtmig
