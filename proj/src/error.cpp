#include "kgcounsel/error.hpp"

#include <fstream>
#include <sstream>

#include "kgcounsel/io.hpp"

namespace kgcounsel {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::EmptyLabel: return "EmptyLabel";
        case ErrorCode::MissingEndpoint: return "MissingEndpoint";
        case ErrorCode::KindViolation: return "KindViolation";
        case ErrorCode::DuplicateEdge: return "DuplicateEdge";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::EmptyQuery: return "EmptyQuery";
        case ErrorCode::InvariantError: return "InvariantError";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::EmptyMatrix: return "EmptyMatrix";
        case ErrorCode::EmptyIndex: return "EmptyIndex";
        case ErrorCode::ProviderError: return "ProviderError";
        case ErrorCode::DimDrift: return "DimDrift";
        case ErrorCode::UnknownTemplate: return "UnknownTemplate";
        case ErrorCode::ClientError: return "ClientError";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::MissingCategory: return "MissingCategory";
        case ErrorCode::UnmatchedModel: return "UnmatchedModel";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

void append_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::IoError, "cannot append to " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace kgcounsel
