#pragma once

#include "cmem/error.hpp"
#include "cmem/dist_core.hpp"
#include "cmem/info_measures.hpp"
#include "cmem/component_family.hpp"
#include "cmem/trace.hpp"
#include "cmem/em_family.hpp"
#include "cmem/cm_em.hpp"
#include "cmem/mmi_classify.hpp"
#include "cmem/harness.hpp"
