#ifndef OSLAB_OSLAB_HPP
#define OSLAB_OSLAB_HPP

#include "embed.hpp"
#include "error.hpp"
#include "metric.hpp"
#include "pde.hpp"
#include "qtorus.hpp"
#include "spectral.hpp"
#include "verdict.hpp"
#include "young.hpp"

#endif // OSLAB_OSLAB_HPP
