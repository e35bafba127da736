// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include "litmap/ingest/archive_client.hpp"
#include "litmap/ingest/atom.hpp"
#include "litmap/ingest/compose.hpp"
#include "litmap/ingest/forum.hpp"
#include "litmap/ingest/xml.hpp"
