# SPDX-License-Identifier: Apache-2.0

"""Core utilities for the occlusion toolkit."""
