// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(quditfft::runner::cli_main(std::env::args_os()));
}
