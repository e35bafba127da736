// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#if __cplusplus < 202002L
#error litmap requires C++20 or newer.
#endif

#include "litmap/analytics.hpp"
#include "litmap/classify.hpp"
#include "litmap/cluster.hpp"
#include "litmap/corpus.hpp"
#include "litmap/date.hpp"
#include "litmap/dimred.hpp"
#include "litmap/embed.hpp"
#include "litmap/error.hpp"
#include "litmap/ingest.hpp"
#include "litmap/matrix.hpp"
#include "litmap/service.hpp"
