# SPDX-License-Identifier: Apache-2.0

"""CLI interface for the occlusion toolkit."""
