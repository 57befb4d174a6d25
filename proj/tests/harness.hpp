#pragma once

// Minimal hand-rolled test harness: each test binary registers named test
// functions, every CHECK prints file:line on failure, and main() exits
// nonzero if anything failed.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace testing {

inline int g_failures = 0;
inline std::vector<std::pair<std::string, std::function<void()>>>& registry() {
    static std::vector<std::pair<std::string, std::function<void()>>> r;
    return r;
}

struct Registrar {
    Registrar(const char* name, std::function<void()> fn) { registry().emplace_back(name, std::move(fn)); }
};

inline int run_all() {
    int failed_tests = 0;
    for (auto& [name, fn] : registry()) {
        int before = g_failures;
        try {
            fn();
        } catch (const std::exception& e) {
            ++g_failures;
            std::printf("[FAIL] %s: unexpected exception: %s\n", name.c_str(), e.what());
        }
        if (g_failures == before) {
            std::printf("[ OK ] %s\n", name.c_str());
        } else {
            std::printf("[FAIL] %s\n", name.c_str());
            ++failed_tests;
        }
    }
    std::printf("%zu tests, %d failed\n", registry().size(), failed_tests);
    return failed_tests == 0 ? 0 : 1;
}

}  // namespace testing

#define TEST_CASE(name)                                                      \
    static void test_fn_##name();                                            \
    static const testing::Registrar reg_##name{#name, test_fn_##name};       \
    static void test_fn_##name()

#define CHECK(cond)                                                          \
    do {                                                                     \
        if (!(cond)) {                                                       \
            ++testing::g_failures;                                           \
            std::printf("  CHECK failed at %s:%d: %s\n", __FILE__, __LINE__, #cond); \
        }                                                                    \
    } while (0)

#define CHECK_MSG(cond, ...)                                                 \
    do {                                                                     \
        if (!(cond)) {                                                       \
            ++testing::g_failures;                                           \
            std::printf("  CHECK failed at %s:%d: %s — ", __FILE__, __LINE__, #cond); \
            std::printf(__VA_ARGS__);                                        \
            std::printf("\n");                                               \
        }                                                                    \
    } while (0)

#define CHECK_NEAR(a, b, tol)                                                \
    do {                                                                     \
        double va = (a), vb = (b), vt = (tol);                               \
        if (!(std::fabs(va - vb) <= vt)) {                                   \
            ++testing::g_failures;                                           \
            std::printf("  CHECK_NEAR failed at %s:%d: %s = %.10g vs %s = %.10g (tol %.3g)\n", \
                        __FILE__, __LINE__, #a, va, #b, vb, vt);             \
        }                                                                    \
    } while (0)

#define CHECK_THROWS(expr)                                                   \
    do {                                                                     \
        bool threw = false;                                                  \
        try {                                                                \
            (void)(expr);                                                    \
        } catch (const std::exception&) {                                    \
            threw = true;                                                    \
        }                                                                    \
        if (!threw) {                                                        \
            ++testing::g_failures;                                           \
            std::printf("  CHECK_THROWS failed at %s:%d: %s did not throw\n", __FILE__, __LINE__, #expr); \
        }                                                                    \
    } while (0)

#define TEST_MAIN()                                                          \
    int main() { return testing::run_all(); }
