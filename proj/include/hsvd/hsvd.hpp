#ifndef HSVD_HSVD_HPP
#define HSVD_HSVD_HPP

// Everything: numerical core, preprocessing and file formats.

#include <hsvd/decompose.hpp>
#include <hsvd/error.hpp>
#include <hsvd/linalg.hpp>
#include <hsvd/model.hpp>
#include <hsvd/preprocess.hpp>
#include <hsvd/spectrum.hpp>

#include <hsvd/io/atomic_write.hpp>
#include <hsvd/io/fid_file.hpp>
#include <hsvd/io/number_format.hpp>
#include <hsvd/io/phantom.hpp>
#include <hsvd/io/svg.hpp>
#include <hsvd/io/tables.hpp>

#endif // HSVD_HSVD_HPP
