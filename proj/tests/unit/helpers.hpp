#pragma once

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include "cuelab/error.hpp"

// Runs expr and checks it throws cuelab::Error with the given code.
#define CHECK_ERROR_CODE(expr, expected)                                   \
    do {                                                                   \
        bool thrown_ = false;                                              \
        try {                                                              \
            (void)(expr);                                                  \
        } catch (const cuelab::Error& e_) {                                \
            thrown_ = true;                                                \
            CHECK(e_.code() == (expected));                                \
        }                                                                  \
        CHECK_MESSAGE(thrown_, "expected cuelab::Error from " #expr);      \
    } while (0)

namespace testing {

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("cuelab_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testing
