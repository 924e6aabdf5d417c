from .app import create_app
from .jobs import Job, JobQueue

__all__ = ["create_app", "Job", "JobQueue"]
