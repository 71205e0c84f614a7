"""Initial schema: experiment run registry.

Revision ID: 0001
Revises:
Create Date: 2026-10-19
"""
from __future__ import annotations

from alembic import op
import sqlalchemy as sa

revision = "0001"
down_revision = None
branch_labels = None
depends_on = None


def upgrade() -> None:
    op.create_table(
        "experiment_runs",
        sa.Column("id", sa.BigInteger().with_variant(sa.Integer(), "sqlite"), primary_key=True, autoincrement=True),
        sa.Column("command", sa.String(32), nullable=False),
        sa.Column("config_hash", sa.String(64), nullable=False),
        sa.Column("seed", sa.BigInteger()),
        sa.Column("code_label", sa.Text()),
        sa.Column("n_points", sa.Integer(), nullable=False),
        sa.Column("output_path", sa.Text()),
        sa.Column("mean_fidelity", sa.Float()),
        sa.Column("created_at", sa.DateTime(timezone=True), server_default=sa.text("CURRENT_TIMESTAMP")),
    )
    op.create_index("ix_experiment_runs_config_hash", "experiment_runs", ["config_hash"])


def downgrade() -> None:
    op.drop_index("ix_experiment_runs_config_hash", table_name="experiment_runs")
    op.drop_table("experiment_runs")
