import json
from datetime import datetime, timezone

from sqlalchemy import Column, DateTime, Integer, String, Text

from app.database import Base


class Run(Base):
    """Registre des exécutions : configuration effective, résumé et CSV."""

    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)
    experiment = Column(String, nullable=False, index=True)
    seed = Column(String, nullable=False)  # entier 64 bits : hors de portée d'INTEGER SQLite
    config = Column(Text, nullable=False, default="{}")
    summary = Column(Text, nullable=False, default="{}")
    csv_text = Column(Text, nullable=False, default="")
    exit_code = Column(Integer, nullable=False)
    created_at = Column(DateTime, nullable=False, default=lambda: datetime.now(timezone.utc))

    def config_dict(self) -> dict:
        return json.loads(self.config)

    def summary_dict(self) -> dict:
        return json.loads(self.summary)

    def __repr__(self) -> str:
        return f"<Run id={self.id} experiment={self.experiment!r} exit_code={self.exit_code}>"
