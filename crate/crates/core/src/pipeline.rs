//! Cycle-count model of the 4-stage estimation pipeline.
//!
//! Stage 0 fetches the n×N neighborhood from image RAM, stage 1 holds the
//! SdCUs and the first Minimum switch layer, stage 2 the remaining switch
//! layers and the index decoder, stage 3 the direction counters and the
//! Maximum tree. The model is a scheduler: functional results are produced by
//! the same arithmetic as the direct estimator, so the configuration changes
//! timing only.
//!
//! Two clocks: CLK1 drives the fetch counter; one CLK2 period covers a full
//! pixel slot. Without inter-stage registers a stage's fetch and compute
//! half-cycles cannot overlap, so one CLK2 costs two fetch rounds of CLK1
//! ticks; with the 128 eight-bit registers in place the halves overlap and
//! one CLK2 costs a single fetch round. With the default 128-entry table that
//! yields 256, 128, 32 or 16 CLK1 ticks per pixel, the four published
//! configurations.

use std::fmt;

use crate::geometry::{neighbor_address, OffsetRom};
use crate::image::{partition_blocks, Image};
use crate::orientation::{pixel_direction, BlockDirectionImage, DirectionHistogram};

const STAGES: usize = 4;
const DRAIN_CLK2: u64 = 3;

/// Invalid pipeline parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum PipelineError {
    /// The image RAM is either single or replicated eightfold, nothing else.
    RamCount(usize),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::RamCount(n) => {
                write!(f, "image RAM count must be 1 or 8, got {n}")
            }
        }
    }
}

impl std::error::Error for PipelineError {}

/// Hardware configuration knobs that set the pipeline's speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    image_ram_count: usize,
    interstage_registers: bool,
    clk1_period_ns: f64,
}

impl PipelineConfig {
    pub fn new(
        image_ram_count: usize,
        interstage_registers: bool,
        clk1_period_ns: f64,
    ) -> Result<Self, PipelineError> {
        if image_ram_count != 1 && image_ram_count != 8 {
            return Err(PipelineError::RamCount(image_ram_count));
        }
        Ok(PipelineConfig {
            image_ram_count,
            interstage_registers,
            clk1_period_ns,
        })
    }

    pub fn image_ram_count(&self) -> usize {
        self.image_ram_count
    }

    pub fn interstage_registers(&self) -> bool {
        self.interstage_registers
    }

    pub fn clk1_period_ns(&self) -> f64 {
        self.clk1_period_ns
    }

    /// CLK1 ticks stage 0 needs to fetch one pixel's neighborhood:
    /// `rom_entries` reads spread over the RAM banks. 128 for the single-RAM
    /// default table, 16 with eight RAMs.
    pub fn fetch_cycle_count(&self, rom_entries: usize) -> u64 {
        (rom_entries as u64).div_ceil(self.image_ram_count as u64)
    }

    /// CLK1 ticks in one CLK2 period (one pixel slot).
    pub fn clk2_in_clk1(&self, rom_entries: usize) -> u64 {
        let halves = if self.interstage_registers { 1 } else { 2 };
        self.fetch_cycle_count(rom_entries) * halves
    }

    /// Total CLK1 ticks to stream an H×L image through the pipeline,
    /// excluding the 3-slot drain. With the 128-entry table this is
    /// H·L·{256, 128, 32, 16} for the four configurations.
    pub fn total_delay(&self, height: usize, width: usize, rom_entries: usize) -> u64 {
        (height as u64) * (width as u64) * self.clk2_in_clk1(rom_entries)
    }
}

/// The fetch schedule stage 0 issues for one pixel: `(bank, address)` in
/// table order, `None` for reads that would fall outside the image. Bank k
/// serves every k-th table entry, so eight banks retire eight reads per pulse.
pub fn address_stream(
    i: usize,
    j: usize,
    rom: &OffsetRom,
    cfg: &PipelineConfig,
    img: &Image,
) -> Vec<(usize, Option<(usize, usize)>)> {
    let mut out = Vec::with_capacity(rom.len());
    let mut k = 0usize;
    for d in 0..rom.direction_count() {
        for &off in rom.offsets(d) {
            out.push((k % cfg.image_ram_count, neighbor_address(i, j, off, img)));
            k += 1;
        }
    }
    out
}

/// Stage occupancy per CLK2 slot: which pixel id each stage holds, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReservationTable {
    slots: Vec<[Option<u64>; STAGES]>,
}

impl ReservationTable {
    /// Number of CLK2 slots recorded (pixel count + drain).
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Pixel id held by `stage` at CLK2 slot `tick`.
    pub fn cell(&self, tick: usize, stage: usize) -> Option<u64> {
        self.slots[tick][stage]
    }

    /// CSV dump: `tick,stage0,stage1,stage2,stage3`, idle cells left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tick,stage0,stage1,stage2,stage3\n");
        for (tick, row) in self.slots.iter().enumerate() {
            out.push_str(&tick.to_string());
            for cell in row {
                out.push(',');
                if let Some(p) = cell {
                    out.push_str(&p.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Everything a pipeline run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    /// Functional output, bit-identical to the direct estimator's.
    pub field: BlockDirectionImage,
    /// Stage occupancy trace over the whole run.
    pub table: ReservationTable,
    /// CLK1 ticks spent streaming the pixels (drain excluded).
    pub clk1_ticks: u64,
    /// CLK1 ticks of pipeline drain after the last pixel enters stage 0.
    pub drain_clk1_ticks: u64,
    /// Block outputs emitted by the pulse counter; one per full block.
    pub block_pulses: usize,
}

/// Streams every pixel of the image's full blocks through the 4-stage
/// pipeline, block-major, one pixel per CLK2 slot.
///
/// Stage 3 accumulates each pixel's direction vote into the saturating
/// counters; the block pulse counter fires once per blockSize² results,
/// emitting the block winner and clearing the counters for the next block.
pub fn run_pipeline(img: &Image, rom: &OffsetRom, cfg: &PipelineConfig) -> PipelineRun {
    let block_size = 16;
    run_pipeline_with_block_size(img, rom, cfg, block_size)
}

/// [`run_pipeline`] with an explicit block size.
pub fn run_pipeline_with_block_size(
    img: &Image,
    rom: &OffsetRom,
    cfg: &PipelineConfig,
    block_size: usize,
) -> PipelineRun {
    let grid = partition_blocks(img, block_size);
    assert!(
        grid.rows() >= 1 && grid.cols() >= 1,
        "image smaller than one block"
    );

    // Block-major pixel stream: all pixels of block (0,0) row by row, then
    // block (0,1), and so on.
    let mut stream: Vec<(usize, usize)> = Vec::with_capacity(grid.len() * block_size * block_size);
    for bi in 0..grid.rows() {
        for bj in 0..grid.cols() {
            for i in bi * block_size..(bi + 1) * block_size {
                for j in bj * block_size..(bj + 1) * block_size {
                    stream.push((i, j));
                }
            }
        }
    }

    let pixel_count = stream.len() as u64;
    let total_slots = pixel_count + DRAIN_CLK2;
    let block_len = (block_size * block_size) as u32;

    let mut stages: [Option<u64>; STAGES] = [None; STAGES];
    let mut slots = Vec::with_capacity(total_slots as usize);
    let mut hist = DirectionHistogram::new(rom.direction_count());
    let mut block_pulse_counter: u32 = 0;
    let mut dirs = Vec::with_capacity(grid.len());
    let mut valid = Vec::with_capacity(grid.len());
    let mut block_pulses = 0usize;

    for tick in 0..total_slots {
        for s in (1..STAGES).rev() {
            stages[s] = stages[s - 1];
        }
        stages[0] = if tick < pixel_count { Some(tick) } else { None };
        slots.push(stages);

        if let Some(p) = stages[STAGES - 1] {
            let (i, j) = stream[p as usize];
            if let Some(d) = pixel_direction(img, i, j, rom) {
                hist.vote(d);
            }
            block_pulse_counter += 1;
            if block_pulse_counter == block_len {
                let (d, v) = hist.winner();
                dirs.push(d);
                valid.push(v);
                block_pulses += 1;
                hist = DirectionHistogram::new(rom.direction_count());
                block_pulse_counter = 0;
            }
        }
    }

    let field = BlockDirectionImage::from_parts(block_size, grid.rows(), grid.cols(), dirs, valid);
    let clk2 = cfg.clk2_in_clk1(rom.len());
    PipelineRun {
        field,
        table: ReservationTable { slots },
        clk1_ticks: pixel_count * clk2,
        drain_clk1_ticks: DRAIN_CLK2 * clk2,
        block_pulses,
    }
}
