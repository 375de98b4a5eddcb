#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

#define REQUIRE_ERRC(expr, errc)                                                   \
    do {                                                                           \
        bool thrown_ = false;                                                      \
        try {                                                                      \
            (void)(expr);                                                          \
        } catch (const ::forge::Error &e_) {                                       \
            thrown_ = true;                                                        \
            CHECK(::forge::to_string(e_.code()) == ::forge::to_string(errc));      \
        }                                                                          \
        CHECK(thrown_);                                                            \
    } while (0)
