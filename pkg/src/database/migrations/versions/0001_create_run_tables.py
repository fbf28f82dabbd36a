"""Create runs and metrics tables."""

import sqlalchemy as sa
from alembic import op

revision = "0001_create_run_tables"
down_revision = None
branch_labels = None
depends_on = None


def upgrade() -> None:
    op.create_table(
        "runs",
        sa.Column("id", sa.String(), primary_key=True),
        sa.Column("kind", sa.String(), nullable=False),
        sa.Column("epsilon", sa.Float(), nullable=True),
        sa.Column("content_hash", sa.String(), nullable=False),
        sa.Column("status", sa.String(), nullable=False),
        sa.Column("message", sa.Text(), nullable=True),
        sa.Column("out_dir", sa.String(), nullable=True),
        sa.Column("final_time", sa.Float(), nullable=True),
        sa.Column("steps", sa.Integer(), nullable=True),
        sa.Column("mass_drift", sa.Float(), nullable=True),
        sa.Column("max_director", sa.Float(), nullable=True),
        sa.Column("energy_drift", sa.Float(), nullable=True),
        sa.Column("sweep_id", sa.String(), nullable=True),
        sa.Column("created_at", sa.DateTime(timezone=True), nullable=False, server_default=sa.text("CURRENT_TIMESTAMP")),
        sa.Column("updated_at", sa.DateTime(timezone=True), nullable=False, server_default=sa.text("CURRENT_TIMESTAMP")),
    )
    op.create_index("idx_runs_kind", "runs", ["kind"])
    op.create_index("idx_runs_sweep", "runs", ["sweep_id"])

    op.create_table(
        "metrics",
        sa.Column("id", sa.Integer(), primary_key=True, autoincrement=True),
        sa.Column("run_id", sa.String(), sa.ForeignKey("runs.id", ondelete="CASCADE"), nullable=False),
        sa.Column("name", sa.String(), nullable=False),
        sa.Column("value", sa.Float(), nullable=False),
    )
    op.create_index("idx_metrics_run", "metrics", ["run_id"])


def downgrade() -> None:
    op.drop_index("idx_metrics_run", table_name="metrics")
    op.drop_table("metrics")
    op.drop_index("idx_runs_sweep", table_name="runs")
    op.drop_index("idx_runs_kind", table_name="runs")
    op.drop_table("runs")
