#include "dsmt/netblocks.hpp"

namespace dsmt::net {

std::string to_string(Variant v) {
    switch (v) {
    case Variant::Dsmt: return "dsmt";
    case Variant::Dsmt0: return "dsmt-0";
    case Variant::NaiveMultitask: return "naive-multitask";
    case Variant::DsmtDepth: return "dsmt-depth";
    }
    throw Error::config("unknown variant enum value");
}

Variant variant_from_string(const std::string& s) {
    if (s == "dsmt") return Variant::Dsmt;
    if (s == "dsmt-0") return Variant::Dsmt0;
    if (s == "naive-multitask") return Variant::NaiveMultitask;
    if (s == "dsmt-depth") return Variant::DsmtDepth;
    throw Error::config("unknown model variant '" + s +
                        "' (expected dsmt, dsmt-0, naive-multitask or dsmt-depth)");
}

namespace {

void check_block(const char* label, const BlockSpec& b) {
    if (b.depth < 1 || b.depth > 3)
        throw Error::config(std::string(label) + ": depth " + std::to_string(b.depth) +
                            " outside [1, 3]");
    if (b.width < 16 || b.width > 32)
        throw Error::config(std::string(label) + ": width " + std::to_string(b.width) +
                            " outside [16, 32]");
    if (b.dropout < 0.25 || b.dropout > 0.85)
        throw Error::config(std::string(label) + ": dropout " + std::to_string(b.dropout) +
                            " outside [0.25, 0.85]");
}

} // namespace

void ModelSpec::validate() const {
    if (streams.empty()) throw Error::config("model: needs at least one stream");
    check_block("perception", perception);
    check_block("multitask", multitask);
    check_block("head", head);
    if (k < 0) throw Error::config("model: negative task count");
    if (variant == Variant::Dsmt0) {
        if (k != 0) throw Error::config("model: dsmt-0 requires k = 0, got " + std::to_string(k));
    } else if (k == 0) {
        throw Error::config("model: " + to_string(variant) + " requires k >= 1 (k = 0 is dsmt-0)");
    }
    if (variant == Variant::DsmtDepth && k < multitask.depth)
        throw Error::config("model: dsmt-depth with k = " + std::to_string(k) +
                            " cannot fill a column of depth " +
                            std::to_string(multitask.depth));
}

} // namespace dsmt::net
